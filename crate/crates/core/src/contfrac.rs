//! Continued-fraction slopes: lazy element patterns, exact big-integer
//! convergents, interval enclosures of the slope, and the standard
//! approximation facts as checkable predicates.

use rug::{Integer, Rational};
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::IntervalScalar;

/// Positions of the spiked elements, `n_k` for `k = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositionSpec {
    /// `n_k = stride * k + offset`.
    Affine { stride: u64, offset: u64 },
    /// Explicit strictly increasing positions (finitely many spikes).
    List(Vec<u64>),
}

impl PositionSpec {
    /// Spike index `k >= 1` such that `n_k == i`, if any.
    fn spike_at(&self, i: u64) -> Option<u64> {
        match self {
            PositionSpec::Affine { stride, offset } => {
                if i <= *offset {
                    return None;
                }
                let d = i - offset;
                if d % stride == 0 {
                    Some(d / stride)
                } else {
                    None
                }
            }
            PositionSpec::List(ps) => ps.iter().position(|&p| p == i).map(|idx| idx as u64 + 1),
        }
    }

    pub fn position(&self, k: u64) -> Option<u64> {
        match self {
            PositionSpec::Affine { stride, offset } => stride.checked_mul(k)?.checked_add(*offset),
            PositionSpec::List(ps) => ps.get(k as usize - 1).copied(),
        }
    }
}

/// Values of the spiked elements as a function of the spike index `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpikeValues {
    /// `a_{n_k} = base^k`.
    Pow(u64),
    /// Same value at every spike.
    Const(u64),
    /// Explicit values; positions past the list fall back to the base element.
    List(Vec<u64>),
}

impl SpikeValues {
    fn value(&self, k: u64) -> Result<Option<u64>> {
        match self {
            SpikeValues::Pow(base) => {
                let e: u32 = k
                    .try_into()
                    .map_err(|_| Error::Overflow(format!("spike exponent {k}")))?;
                base.checked_pow(e)
                    .map(Some)
                    .ok_or_else(|| Error::Overflow(format!("{base}^{k} exceeds u64")))
            }
            SpikeValues::Const(v) => Ok(Some(*v)),
            SpikeValues::List(vs) => Ok(vs.get(k as usize - 1).copied()),
        }
    }
}

/// Infinite element pattern `a_1, a_2, ...` of a continued fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementPattern {
    Const(u64),
    Periodic(Vec<u64>),
    Spiked {
        base: u64,
        positions: PositionSpec,
        values: SpikeValues,
    },
}

/// An irrational slope `theta = [a_0; a_1, a_2, ...]` given by a pattern.
///
/// The pattern is inherently infinite, so the slope is irrational by
/// construction; elements are generated lazily to any index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    a0: u64,
    pattern: ElementPattern,
}

impl ContinuedFraction {
    pub fn new(a0: u64, pattern: ElementPattern) -> Result<Self> {
        match &pattern {
            ElementPattern::Const(c) => {
                if *c < 1 {
                    return Err(Error::InvalidConfig("const element must be >= 1".into()));
                }
            }
            ElementPattern::Periodic(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidConfig(
                        "periodic pattern must be non-empty".into(),
                    ));
                }
                if v.iter().any(|&e| e < 1) {
                    return Err(Error::InvalidConfig(
                        "periodic elements must be >= 1".into(),
                    ));
                }
            }
            ElementPattern::Spiked {
                base,
                positions,
                values,
            } => {
                if *base < 1 {
                    return Err(Error::InvalidConfig("spike base must be >= 1".into()));
                }
                match positions {
                    PositionSpec::Affine { stride, .. } if *stride == 0 => {
                        return Err(Error::InvalidConfig("spike stride must be >= 1".into()));
                    }
                    PositionSpec::List(ps) => {
                        if ps.windows(2).any(|w| w[0] >= w[1]) || ps.iter().any(|&p| p == 0) {
                            return Err(Error::InvalidConfig(
                                "spike positions must be strictly increasing and >= 1".into(),
                            ));
                        }
                    }
                    _ => {}
                }
                match values {
                    SpikeValues::Pow(b) if *b < 2 => {
                        return Err(Error::InvalidConfig("power spike base must be >= 2".into()));
                    }
                    SpikeValues::Const(v) | SpikeValues::Pow(v) if *v < 1 => {
                        return Err(Error::InvalidConfig("spike value must be >= 1".into()));
                    }
                    SpikeValues::List(vs) if vs.iter().any(|&v| v < 1) => {
                        return Err(Error::InvalidConfig("spike values must be >= 1".into()));
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { a0, pattern })
    }

    pub fn a0(&self) -> u64 {
        self.a0
    }

    pub fn pattern(&self) -> &ElementPattern {
        &self.pattern
    }

    /// Element `a_i`; `element(0)` is `a_0`.
    pub fn element(&self, i: u64) -> Result<u64> {
        if i == 0 {
            return Ok(self.a0);
        }
        match &self.pattern {
            ElementPattern::Const(c) => Ok(*c),
            ElementPattern::Periodic(v) => Ok(v[((i - 1) % v.len() as u64) as usize]),
            ElementPattern::Spiked {
                base,
                positions,
                values,
            } => {
                if let Some(k) = positions.spike_at(i) {
                    Ok(values.value(k)?.unwrap_or(*base))
                } else {
                    Ok(*base)
                }
            }
        }
    }

    /// Smallest element over `1 <= i <= up_to` (pattern-level check helper).
    pub fn min_tail_element(&self, up_to: u64) -> Result<u64> {
        let mut m = u64::MAX;
        for i in 1..=up_to {
            m = m.min(self.element(i)?);
        }
        Ok(m)
    }

    /// Exact convergents `p_0/q_0 .. p_n/q_n` via the standard recurrence
    /// with seeds `p_{-1} = 1, q_{-1} = 0, p_0 = a_0, q_0 = 1`.
    pub fn convergents(&self, n_max: usize) -> Result<Vec<Convergent>> {
        let mut out = Vec::with_capacity(n_max + 1);
        let (mut pm1, mut qm1) = (Integer::from(1), Integer::from(0));
        let (mut p, mut q) = (Integer::from(self.a0), Integer::from(1));
        out.push(Convergent {
            n: 0,
            p: p.clone(),
            q: q.clone(),
        });
        for n in 1..=n_max {
            let a = self.element(n as u64)?;
            let np = Integer::from(&p * a) + &pm1;
            let nq = Integer::from(&q * a) + &qm1;
            pm1 = std::mem::replace(&mut p, np);
            qm1 = std::mem::replace(&mut q, nq);
            out.push(Convergent {
                n,
                p: p.clone(),
                q: q.clone(),
            });
        }
        Ok(out)
    }

    pub fn convergent(&self, n: usize) -> Result<Convergent> {
        Ok(self
            .convergents(n)?
            .pop()
            .expect("non-empty by construction"))
    }

    /// Interval `[p_{2n}/q_{2n}, p_{2n+1}/q_{2n+1}]` (outward-rounded) for the
    /// smallest `n` reaching the requested width. The slope is provably
    /// inside because even convergents increase to it and odd ones decrease.
    pub fn theta_enclosure(&self, bits: u32, target_width: f64) -> Result<IntervalScalar> {
        if !(target_width > 0.0) {
            return Err(Error::InvalidConfig("target width must be positive".into()));
        }
        let target = rug::Float::with_val(bits, target_width);
        let (mut pm1, mut qm1) = (Integer::from(1), Integer::from(0));
        let (mut p, mut q) = (Integer::from(self.a0), Integer::from(1));
        let mut even = (p.clone(), q.clone());
        let mut best_width: Option<rug::Float> = None;
        const MAX_INDEX: usize = 100_000;
        for n in 1..=MAX_INDEX {
            let a = self.element(n as u64)?;
            let np = Integer::from(&p * a) + &pm1;
            let nq = Integer::from(&q * a) + &qm1;
            pm1 = std::mem::replace(&mut p, np);
            qm1 = std::mem::replace(&mut q, nq);
            if n % 2 == 1 {
                let lo = IntervalScalar::from_int_ratio(&even.0, &even.1, bits)?;
                let hi = IntervalScalar::from_int_ratio(&p, &q, bits)?;
                let enc = IntervalScalar::from_endpoints(lo.lo().clone(), hi.hi().clone())?;
                let w = enc.width();
                if w <= target {
                    return Ok(enc);
                }
                // outward rounding floors the width near theta * 2^(1-bits);
                // no progress means the goal is unreachable at this mantissa
                if let Some(bw) = &best_width {
                    if w >= *bw {
                        return Err(Error::InsufficientPrecision(format!(
                            "enclosure width {target_width} not reachable at {bits} bits"
                        )));
                    }
                }
                best_width = Some(w);
            } else {
                even = (p.clone(), q.clone());
            }
        }
        Err(Error::InsufficientPrecision(format!(
            "enclosure width {target_width} not reachable at {bits} bits"
        )))
    }

    /// Enclosure of `|p_n - theta*q_n|`, which must be sign-definite.
    pub fn approximation_gap(&self, n: usize, theta: &IntervalScalar) -> Result<IntervalScalar> {
        let c = self.convergent(n)?;
        approximation_gap_of(&c, theta)
    }

    /// The fact-(1b) bracket `[1/(q_n + q_{n+1}), 1/q_{n+1}]`, outward-rounded.
    pub fn gap_bracket(&self, n: usize, bits: u32) -> Result<IntervalScalar> {
        let cs = self.convergents(n + 1)?;
        let qsum = Integer::from(&cs[n].q + &cs[n + 1].q);
        let one = Integer::from(1);
        let lo = IntervalScalar::from_int_ratio(&one, &qsum, bits)?;
        let hi = IntervalScalar::from_int_ratio(&one, &cs[n + 1].q, bits)?;
        IntervalScalar::from_endpoints(lo.lo().clone(), hi.hi().clone())
    }
}

/// `theta*q_n - p_n` as a sign-definite enclosure, absolute value taken.
pub fn approximation_gap_of(c: &Convergent, theta: &IntervalScalar) -> Result<IntervalScalar> {
    let d = theta
        .mul_integer(&c.q)
        .sub(&IntervalScalar::from_integer(&c.p, theta.prec()));
    if d.contains_zero() {
        return Err(Error::InsufficientPrecision(format!(
            "enclosure of p_{n} - theta*q_{n} straddles zero; refine theta",
            n = c.n
        )));
    }
    Ok(d.abs())
}

/// Exact convergent `p_n/q_n` of a continued fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    n: usize,
    p: Integer,
    q: Integer,
}

impl Convergent {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &Integer {
        &self.p
    }

    pub fn q(&self) -> &Integer {
        &self.q
    }

    pub fn as_rational(&self) -> Rational {
        Rational::from((self.p.clone(), self.q.clone()))
    }
}

impl fmt::Display for Convergent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

fn parse_u64(s: &str, what: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| Error::InvalidConfig(format!("bad {what}: {s:?}")))
}

fn parse_u64_list(s: &str, what: &str) -> Result<Vec<u64>> {
    s.split(';').map(|x| parse_u64(x, what)).collect()
}

fn parse_positions(s: &str) -> Result<PositionSpec> {
    let s = s.trim();
    if let Some(kpos) = s.find('k') {
        let stride = parse_u64(&s[..kpos], "spike stride")?;
        let rest = s[kpos + 1..].trim();
        let offset = if rest.is_empty() {
            0
        } else if let Some(off) = rest.strip_prefix('+') {
            parse_u64(off, "spike offset")?
        } else {
            return Err(Error::InvalidConfig(format!("bad positions spec: {s:?}")));
        };
        Ok(PositionSpec::Affine { stride, offset })
    } else {
        Ok(PositionSpec::List(parse_u64_list(s, "spike position")?))
    }
}

fn parse_values(s: &str) -> Result<SpikeValues> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        if exp.trim() != "k" {
            return Err(Error::InvalidConfig(format!("bad values spec: {s:?}")));
        }
        Ok(SpikeValues::Pow(parse_u64(base, "spike value base")?))
    } else if s.contains(';') {
        Ok(SpikeValues::List(parse_u64_list(s, "spike value")?))
    } else {
        Ok(SpikeValues::Const(parse_u64(s, "spike value")?))
    }
}

/// Parse a slope spec of the form
/// `a0=3,const:3` | `a0=3,periodic:3,4,5` |
/// `a0=3,spiked:base=3,positions=2k,values=4^k`.
pub fn parse_slope(spec: &str) -> Result<ContinuedFraction> {
    let spec = spec.trim();
    let rest = spec
        .strip_prefix("a0=")
        .ok_or_else(|| Error::InvalidConfig(format!("slope spec must start with a0=: {spec:?}")))?;
    let (a0_str, pat) = rest
        .split_once(',')
        .ok_or_else(|| Error::InvalidConfig(format!("slope spec missing pattern: {spec:?}")))?;
    let a0 = parse_u64(a0_str, "a0")?;
    let pattern = if let Some(v) = pat.strip_prefix("const:") {
        ElementPattern::Const(parse_u64(v, "const element")?)
    } else if let Some(v) = pat.strip_prefix("periodic:") {
        ElementPattern::Periodic(
            v.split(',')
                .map(|x| parse_u64(x, "periodic element"))
                .collect::<Result<_>>()?,
        )
    } else if let Some(v) = pat.strip_prefix("spiked:") {
        let mut base = None;
        let mut positions = None;
        let mut values = None;
        for part in v.split(',') {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("bad spiked field: {part:?}")))?;
            match key.trim() {
                "base" => base = Some(parse_u64(val, "spike base")?),
                "positions" => positions = Some(parse_positions(val)?),
                "values" => values = Some(parse_values(val)?),
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown spiked field {other:?}"
                    )));
                }
            }
        }
        ElementPattern::Spiked {
            base: base.ok_or_else(|| Error::InvalidConfig("spiked: missing base".into()))?,
            positions: positions
                .ok_or_else(|| Error::InvalidConfig("spiked: missing positions".into()))?,
            values: values.ok_or_else(|| Error::InvalidConfig("spiked: missing values".into()))?,
        }
    } else {
        return Err(Error::InvalidConfig(format!(
            "unknown pattern kind: {pat:?}"
        )));
    };
    ContinuedFraction::new(a0, pattern)
}

// Display is the exact inverse of `parse_slope`, so configs round-trip.
impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a0={},", self.a0)?;
        match &self.pattern {
            ElementPattern::Const(c) => write!(f, "const:{c}"),
            ElementPattern::Periodic(v) => {
                write!(f, "periodic:")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            ElementPattern::Spiked {
                base,
                positions,
                values,
            } => {
                write!(f, "spiked:base={base},positions=")?;
                match positions {
                    PositionSpec::Affine { stride, offset } => {
                        if *offset == 0 {
                            write!(f, "{stride}k")?;
                        } else {
                            write!(f, "{stride}k+{offset}")?;
                        }
                    }
                    PositionSpec::List(ps) => {
                        let strs: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                        write!(f, "{}", strs.join(";"))?;
                    }
                }
                write!(f, ",values=")?;
                match values {
                    SpikeValues::Pow(b) => write!(f, "{b}^k"),
                    SpikeValues::Const(v) => write!(f, "{v}"),
                    SpikeValues::List(vs) => {
                        let strs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                        write!(f, "{}", strs.join(";"))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const3() -> ContinuedFraction {
        ContinuedFraction::new(3, ElementPattern::Const(3)).unwrap()
    }

    fn default_theta2() -> ContinuedFraction {
        parse_slope("a0=3,spiked:base=3,positions=2k,values=4^k").unwrap()
    }

    #[test]
    fn recurrence_by_hand() {
        let cs = const3().convergents(3).unwrap();
        let got: Vec<(i64, i64)> = cs
            .iter()
            .map(|c| (c.p().to_i64().unwrap(), c.q().to_i64().unwrap()))
            .collect();
        assert_eq!(got, vec![(3, 1), (10, 3), (33, 10), (109, 33)]);
    }

    #[test]
    fn seed_case_a0_zero() {
        let cf = ContinuedFraction::new(0, ElementPattern::Const(5)).unwrap();
        let c0 = cf.convergent(0).unwrap();
        assert_eq!(c0.p().to_i64().unwrap(), 0);
        assert_eq!(c0.q().to_i64().unwrap(), 1);
    }

    #[test]
    fn determinant_is_one_exactly() {
        for cf in [const3(), default_theta2()] {
            let cs = cf.convergents(31).unwrap();
            for w in cs.windows(2) {
                let det = Integer::from(w[1].p() * w[0].q()) - Integer::from(w[0].p() * w[1].q());
                assert_eq!(det.abs(), Integer::from(1));
            }
        }
    }

    #[test]
    fn gcd_is_one() {
        let cs = default_theta2().convergents(20).unwrap();
        for c in cs {
            assert_eq!(Integer::from(c.p().gcd_ref(c.q())), Integer::from(1));
        }
    }

    #[test]
    fn alternation_as_exact_rationals() {
        for cf in [const3(), default_theta2()] {
            let cs = cf.convergents(20).unwrap();
            for n in (0..18).step_by(2) {
                assert!(cs[n].as_rational() < cs[n + 2].as_rational());
                assert!(cs[n + 1].as_rational() > cs[n + 3].as_rational());
            }
        }
    }

    #[test]
    fn theta_enclosure_closed_form() {
        // theta for [3;3,3,...] solves theta^2 = 3 theta + 1:
        // (3+sqrt(13))/2 = 3.3027756377319946465596106337352479731 (mpmath)
        let enc = const3().theta_enclosure(256, 1e-12).unwrap();
        crate::test_support::assert_near(&enc, 3.3027756377319946, 1e-13);
        assert!(enc.width().to_f64() <= 1e-12);
    }

    #[test]
    fn theta_enclosure_coarse_bracket() {
        let enc = default_theta2().theta_enclosure(256, 1e-3).unwrap();
        // must lie within [43/13, 139/42]
        assert!(enc.lo().to_f64() >= 43.0 / 13.0 - 1e-15);
        assert!(enc.hi().to_f64() <= 139.0 / 42.0 + 1e-15);
    }

    #[test]
    fn theta_enclosures_nest() {
        let cf = default_theta2();
        let coarse = cf.theta_enclosure(256, 1e-6).unwrap();
        let fine = cf.theta_enclosure(256, 1e-18).unwrap();
        assert!(coarse.contains(&fine));
    }

    #[test]
    fn approximation_gap_examples() {
        let cf = const3();
        let theta = cf.theta_enclosure(256, 1e-40).unwrap();
        // |10 - 3 theta| = 0.09167308680401606 (mpmath), inside [1/13, 1/10]
        let g1 = cf.approximation_gap(1, &theta).unwrap();
        crate::test_support::assert_near(&g1, 0.09167308680401606, 1e-12);
        let b1 = cf.gap_bracket(1, 256).unwrap();
        assert!(b1.contains(&g1));
        // theta - 3 = 0.30277563773199465, inside [1/4, 1/3]
        let g0 = cf.approximation_gap(0, &theta).unwrap();
        crate::test_support::assert_near(&g0, 0.30277563773199465, 1e-12);
        let b0 = cf.gap_bracket(0, 256).unwrap();
        assert!(b0.contains(&g0));
    }

    #[test]
    fn gap_bracket_holds_to_30_for_both_default_slopes() {
        // the spiked slope's q_30 is near 1e79, so the gap there is
        // around 1e-80 and needs a far sharper slope enclosure
        for cf in [const3(), default_theta2()] {
            let theta = cf.theta_enclosure(1024, 1e-200).unwrap();
            for n in 0..=30 {
                let g = cf.approximation_gap(n, &theta).unwrap();
                let b = cf.gap_bracket(n, 1024).unwrap();
                assert!(b.contains(&g), "bracket fails at n={n} for {cf}");
            }
        }
    }

    #[test]
    fn spiked_elements() {
        let cf = default_theta2();
        let want = [3u64, 3, 4, 3, 16, 3, 64, 3, 256, 3, 1024, 3, 4096];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(cf.element(i as u64).unwrap(), *w, "element {i}");
        }
    }

    #[test]
    fn slope_spec_round_trip() {
        for s in [
            "a0=3,const:3",
            "a0=0,const:7",
            "a0=3,periodic:3,4,5",
            "a0=3,spiked:base=3,positions=2k,values=4^k",
            "a0=3,spiked:base=3,positions=2k+1,values=50",
            "a0=3,spiked:base=3,positions=6,values=50",
            "a0=3,spiked:base=3,positions=4;8,values=10;20",
        ] {
            let cf = parse_slope(s).unwrap();
            assert_eq!(cf.to_string(), s);
            assert_eq!(parse_slope(&cf.to_string()).unwrap(), cf);
        }
    }

    #[test]
    fn bad_specs_rejected() {
        for s in [
            "const:3",
            "a0=3",
            "a0=x,const:3",
            "a0=3,const:0",
            "a0=3,periodic:",
            "a0=3,spiked:base=3,positions=0k,values=4^k",
            "a0=3,spiked:base=3,values=4^k",
        ] {
            assert!(parse_slope(s).is_err(), "should reject {s:?}");
        }
    }

    #[test]
    fn pow_spike_overflow_is_an_error() {
        let cf = parse_slope("a0=3,spiked:base=3,positions=1k,values=4^k").unwrap();
        assert!(matches!(cf.element(40), Err(Error::Overflow(_))));
    }
}
