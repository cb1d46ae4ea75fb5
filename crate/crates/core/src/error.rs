use thiserror::Error;

/// Errors shared by all modules of the crate.
///
/// Soundness rule: an operation either returns a valid enclosure or an
/// error. It never silently widens past a domain boundary (division by an
/// interval containing zero, log of a non-positive interval, ...).
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Mathematical domain violation (0 in a divisor, log/sqrt of a
    /// non-positive interval, radius below the slit radius, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// `bisect_root` was called with endpoints whose images have the same
    /// certain sign.
    #[error("no sign change over the bracket: f({lo}) and f({hi}) have the same sign")]
    NoSignChange { lo: String, hi: String },

    /// An enclosure that must be sign-definite (or a comparison that must be
    /// decidable) straddles zero at the current precision. Refine and retry.
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    /// A flow query below the validity threshold of the shortest-vector
    /// classification.
    #[error("time {t} is below the classification threshold {threshold}")]
    BelowThreshold { t: String, threshold: String },

    /// Two candidate lengths overlap even after the retry cap; the caller
    /// must either refine further or accept a reported tie.
    #[error("ambiguous comparison at current precision: {0}")]
    AmbiguousAtPrecision(String),

    /// The exhaustive-search window cannot certify the requested count.
    #[error("window {window} too small: certification needs q up to {needed}")]
    WindowTooSmall { needed: u64, window: u64 },

    /// Curve pair or operation outside the supported cases.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Configuration or pattern-spec rejection, with a precise message.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Element pattern produced a value outside the representable range.
    #[error("element overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
