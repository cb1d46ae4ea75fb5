//! Run configuration: every knob of a trace run, parsed from flags and/or a
//! flat `key=value` config file. Serialization is the exact inverse of
//! parsing, so configs round-trip.

use rug::Rational;
use std::fmt;
use std::str::FromStr;

use teichflow_core::contfrac::parse_slope;
use teichflow_core::divergence::Scenario;
use teichflow_core::error::{Error, Result};
use teichflow_core::numerics::Precision;
use teichflow_core::surface::SlitSurfaceConfig;
use teichflow_core::ContinuedFraction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

impl fmt::Display for OutFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutFormat::Csv => write!(f, "csv"),
            OutFormat::Json => write!(f, "json"),
        }
    }
}

impl FromStr for OutFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutFormat::Csv),
            "json" => Ok(OutFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

/// Full configuration of a scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub theta1: ContinuedFraction,
    pub theta2: ContinuedFraction,
    pub s: Rational,
    pub kmax: usize,
    pub samples: usize,
    pub bits: u32,
    pub target_width: f64,
    pub oracle_cap: u64,
    pub format: OutFormat,
    pub control: bool,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            theta1: parse_slope("a0=3,const:3").expect("valid default slope"),
            theta2: parse_slope("a0=3,spiked:base=3,positions=2k,values=4^k")
                .expect("valid default slope"),
            s: Rational::from((1u32, 2u32)),
            kmax: 5,
            samples: 2,
            bits: Precision::DEFAULT_BITS,
            target_width: Precision::DEFAULT_TARGET_WIDTH,
            oracle_cap: 1_000_000,
            format: OutFormat::Csv,
            control: false,
            jobs: 0, // 0 = number of processors
        }
    }
}

impl RunConfig {
    pub fn precision(&self) -> Result<Precision> {
        Precision::new(self.bits, self.target_width)
    }

    /// The scenario this configuration describes, control mode applied.
    pub fn scenario(&self) -> Result<Scenario> {
        let cfg = SlitSurfaceConfig::new(self.theta1.clone(), self.theta2.clone(), self.s.clone())?;
        let scn = Scenario::new(
            cfg,
            self.kmax,
            self.samples,
            self.precision()?,
            self.oracle_cap,
        )?;
        if self.control {
            scn.control()
        } else {
            Ok(scn)
        }
    }

    /// Flat `key=value` serialization, one pair per line, LF endings.
    pub fn serialize(&self) -> String {
        format!(
            "theta1={}\ntheta2={}\ns={}\nkmax={}\nsamples={}\nbits={}\ntarget_width={}\noracle_cap={}\nformat={}\ncontrol={}\njobs={}\n",
            self.theta1,
            self.theta2,
            self.s,
            self.kmax,
            self.samples,
            self.bits,
            self.target_width,
            self.oracle_cap,
            self.format,
            self.control,
            self.jobs,
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("bad {what}: {value:?}"));
        match key {
            "theta1" => self.theta1 = parse_slope(value)?,
            "theta2" => self.theta2 = parse_slope(value)?,
            "s" => {
                let r = Rational::from_str(value).map_err(|_| bad("slit length"))?;
                if r <= 0u32 || r >= 1u32 {
                    return Err(Error::InvalidConfig(format!(
                        "slit length must lie in (0, 1), got {value}"
                    )));
                }
                self.s = r;
            }
            "kmax" => self.kmax = value.parse().map_err(|_| bad("kmax"))?,
            "samples" => self.samples = value.parse().map_err(|_| bad("samples"))?,
            "bits" => self.bits = value.parse().map_err(|_| bad("bits"))?,
            "target_width" => self.target_width = value.parse().map_err(|_| bad("target_width"))?,
            "oracle_cap" => self.oracle_cap = value.parse().map_err(|_| bad("oracle_cap"))?,
            "format" => self.format = value.parse()?,
            "control" => self.control = value.parse().map_err(|_| bad("control"))?,
            "jobs" => self.jobs = value.parse().map_err(|_| bad("jobs"))?,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown config key {other:?}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_default() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }

    #[test]
    fn round_trip_custom() {
        let mut cfg = RunConfig::default();
        cfg.set("theta2", "a0=3,periodic:3,4,5").unwrap();
        cfg.set("s", "2/7").unwrap();
        cfg.set("kmax", "3").unwrap();
        cfg.set("bits", "128").unwrap();
        cfg.set("target_width", "1e-20").unwrap();
        cfg.set("format", "json").unwrap();
        cfg.set("control", "true").unwrap();
        assert_eq!(RunConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("s", "3/2").is_err());
        assert!(cfg.set("bits", "lots").is_err());
        assert!(cfg.set("nonsense", "1").is_err());
        assert!(RunConfig::parse("theta1").is_err());
    }
}
