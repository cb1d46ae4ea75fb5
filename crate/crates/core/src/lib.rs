//! A verified numerical laboratory for the geodesic flow on a genus-2
//! surface glued from two slit square tori.
//!
//! The crate tracks the shortest and second-shortest lattice curves on each
//! torus sheet via continued-fraction convergents, encloses their extremal
//! and hyperbolic lengths in certified intervals, and traces the ratio of
//! the two marked curves' hyperbolic lengths along tagged time sequences.
//! With one bounded slope and one slope carrying unbounded spiked elements,
//! the trace oscillates instead of settling, which is the computable shadow
//! of a geodesic ray with no projective limit.
//!
//! Modules follow the pipeline:
//! - [`numerics`]: directed-rounding interval arithmetic and root bracketing;
//! - [`contfrac`]: element patterns, exact convergents, slope enclosures;
//! - [`flow`]: flat lengths under the lattice flow, minimizing times,
//!   shortest-vector classification and the exhaustive oracle;
//! - [`surface`]: the two-sheet slit construction, intersection numbers,
//!   cylinders and the annulus modulus bound;
//! - [`lengths`]: the extremal-length sandwich, hyperbolic conversion,
//!   collar widths and the combinational curve-length estimators;
//! - [`divergence`]: scenarios, tagged time ladders, the certified ratio
//!   trace and the limit-weight summary.

pub mod contfrac;
pub mod divergence;
pub mod error;
pub mod flow;
pub mod lengths;
pub mod numerics;
pub mod surface;

pub use contfrac::{parse_slope, ContinuedFraction, Convergent, ElementPattern};
pub use error::{Error, Result};
pub use flow::{FlowTime, LatticeVector, TimeTag};
pub use numerics::{IntervalScalar, Precision};
pub use surface::{CurveId, Sheet, SlitSurfaceConfig};

/// Environment variable that overrides the default mantissa width.
pub const BITS_ENV_VAR: &str = "TEICHFLOW_BITS";
