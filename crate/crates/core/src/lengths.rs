//! Length calculus on the glued surface: the extremal-length sandwich for
//! short curves, conversion to hyperbolic length, collar widths, and the
//! combinational upper/lower bounds used by the ratio trace.

use rug::{Float, Rational};
use std::fmt;

use crate::error::{Error, Result};
use crate::flow::{flat_length_sq, FlowTime, LatticeVector};
use crate::numerics::{bisect_root, IntervalScalar};
use crate::surface::{cylinder_for_gap, intersection_number, CurveId, Sheet};

/// How a length enclosure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    /// Extremal-length sandwich around the flat length, converted through
    /// the two-sided hyperbolic/extremal comparison.
    ExtSandwich,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundMethod::ExtSandwich => write!(f, "ext-sandwich"),
        }
    }
}

/// Certified flat/extremal/hyperbolic enclosures for one curve at one time.
#[derive(Debug, Clone)]
pub struct LengthInterval {
    pub curve: CurveId,
    pub t: FlowTime,
    pub flat_sq: IntervalScalar,
    pub ext: IntervalScalar,
    pub hyp: IntervalScalar,
    pub method: BoundMethod,
}

/// Per-sheet snapshot: the shortest and second-shortest curves with their
/// length enclosures. The first curve is a convergent of the sheet slope;
/// the second may be any vector from the second-shortest candidate family.
#[derive(Debug, Clone)]
pub struct ShortCurveState {
    pub sheet: Sheet,
    pub t: FlowTime,
    pub first_index: usize,
    pub first: LengthInterval,
    pub second: LengthInterval,
}

impl ShortCurveState {
    pub fn first_vector(&self) -> &LatticeVector {
        match &self.first.curve {
            CurveId::SheetCurve { vector, .. } => vector,
            _ => unreachable!("short curves are sheet curves"),
        }
    }

    pub fn second_vector(&self) -> &LatticeVector {
        match &self.second.curve {
            CurveId::SheetCurve { vector, .. } => vector,
            _ => unreachable!("short curves are sheet curves"),
        }
    }
}

fn gap_of(theta: &IntervalScalar, v: &LatticeVector) -> Result<IntervalScalar> {
    let d = theta
        .mul_integer(v.q())
        .sub(&IntervalScalar::from_integer(v.p(), theta.prec()));
    if d.contains_zero() {
        return Err(Error::InsufficientPrecision(format!(
            "enclosure of theta q - p straddles zero for {v}; refine theta"
        )));
    }
    Ok(d.abs())
}

/// Certified lower bound for the extremal length of a sheet curve that can
/// be represented off the slit: flat length squared over the area of the
/// comparison metric, `1 + (pi + 2) s^2 e^{-t}`.
pub fn ext_lower(
    theta: &IntervalScalar,
    v: &LatticeVector,
    s: &Rational,
    t: &FlowTime,
) -> Result<IntervalScalar> {
    let prec = theta.prec();
    let lsq = flat_length_sq(theta, v, t)?;
    let sv = IntervalScalar::from_rational(s, prec);
    let stadium = IntervalScalar::pi(prec)
        .add(&IntervalScalar::from_u64(2, prec))
        .mul(&sv.square())
        .mul(&t.interval().neg().exp());
    lsq.div(&IntervalScalar::one(prec).add(&stadium))
}

/// Certified upper bound: reciprocal of the modulus of the largest embedded
/// cylinder of parallel curves avoiding the slit.
pub fn ext_upper(
    theta: &IntervalScalar,
    v: &LatticeVector,
    s: &Rational,
    t: &FlowTime,
) -> Result<IntervalScalar> {
    let gap = gap_of(theta, v)?;
    let cyl = cylinder_for_gap(theta, v, &gap, s, t)?;
    cyl.modulus.recip()
}

/// Two-sided extremal-length enclosure `[ext_lower.lo, ext_upper.hi]`.
pub fn ext_enclosure(
    theta: &IntervalScalar,
    v: &LatticeVector,
    s: &Rational,
    t: &FlowTime,
) -> Result<IntervalScalar> {
    let lo = ext_lower(theta, v, s, t)?;
    let hi = ext_upper(theta, v, s, t)?;
    IntervalScalar::from_endpoints(lo.lo().clone(), hi.hi().clone()).map_err(|_| {
        Error::InsufficientPrecision(format!(
            "extremal sandwich inverted for {v}: [{lo}] vs [{hi}]"
        ))
    })
}

/// Hyperbolic length from extremal length via the two-sided comparison
/// `2 e^{-l/2} <= l / Ext <= pi`: the upper endpoint is `pi Ext.hi`, the
/// lower endpoint the unique root of `l = 2 Ext.lo e^{-l/2}`.
pub fn hyp_from_ext(ext: &IntervalScalar) -> Result<IntervalScalar> {
    if !ext.is_positive() {
        return Err(Error::Domain(format!(
            "extremal length must be positive, got {ext}"
        )));
    }
    let prec = ext.prec();
    let two_ext = ext.mul(&IntervalScalar::from_u64(2, prec)).lo().clone();
    let two_ext_iv = IntervalScalar::point(two_ext.clone());
    let f = |l: &IntervalScalar| -> Result<IntervalScalar> {
        let half = l.div(&IntervalScalar::from_u64(2, prec))?;
        Ok(l.sub(&two_ext_iv.mul(&half.neg().exp())))
    };
    // bracket [0, 2 Ext.lo]: f(0) = -2Ext < 0, f(2Ext) = 2Ext(1 - e^{-Ext}) > 0
    let zero = Float::with_val(prec, 0);
    let tol_scale = two_ext.clone().min(&Float::with_val(prec, 1));
    let mut tol = Float::with_val(prec, 1e-25f64);
    tol *= &tol_scale;
    let lo_root = bisect_root(f, &zero, &two_ext, &tol)?;
    let hi = IntervalScalar::pi(prec).mul(ext);
    IntervalScalar::from_endpoints(lo_root.lo().clone(), hi.hi().clone())
}

/// Collar half-width of a simple closed geodesic of hyperbolic length `l`:
/// `w = arcsinh(1 / sinh(l/2))`, decreasing in `l`.
pub fn collar_width(hyp: &IntervalScalar) -> Result<IntervalScalar> {
    if !hyp.is_positive() {
        return Err(Error::Domain(format!(
            "hyperbolic length must be positive, got {hyp}"
        )));
    }
    let prec = hyp.prec();
    let half = hyp.div(&IntervalScalar::from_u64(2, prec))?;
    Ok(half.sinh().recip()?.asinh())
}

/// Length enclosure for a sheet curve, with the extremal sandwich and the
/// hyperbolic conversion applied.
pub fn length_interval(
    theta: &IntervalScalar,
    sheet: Sheet,
    v: &LatticeVector,
    s: &Rational,
    t: &FlowTime,
) -> Result<LengthInterval> {
    let flat_sq = flat_length_sq(theta, v, t)?;
    let ext = ext_enclosure(theta, v, s, t)?;
    let hyp = hyp_from_ext(&ext)?;
    Ok(LengthInterval {
        curve: CurveId::sheet_curve(sheet, v.clone()),
        t: t.clone(),
        flat_sq,
        ext,
        hyp,
        method: BoundMethod::ExtSandwich,
    })
}

/// Upper estimator for the hyperbolic length of `target` from the two short
/// curves: `hyp.hi(first) i(second, target) + hyp.hi(second) i(first, target)`.
/// Valid because the short pair intersects once, so `target` is homotopic to
/// a concatenation of `i(second, target)` copies of the first curve and
/// `i(first, target)` copies of the second through a common point.
pub fn curve_length_upper(state: &ShortCurveState, target: &CurveId) -> Result<IntervalScalar> {
    if target.sheet() != Some(state.sheet) {
        return Err(Error::Unsupported(format!(
            "length estimator needs a same-sheet target, got {target}"
        )));
    }
    let i_first = intersection_number(&state.first.curve, target)?;
    let i_second = intersection_number(&state.second.curve, target)?;
    let h1 = IntervalScalar::point(state.first.hyp.hi().clone());
    let h2 = IntervalScalar::point(state.second.hyp.hi().clone());
    Ok(h1.mul_integer(&i_second).add(&h2.mul_integer(&i_first)))
}

/// Lower bound for the hyperbolic length of `target`: each of its
/// intersections with a short geodesic crosses that geodesic's full collar,
/// so the length is at least `2 w i`. The better of the two short curves'
/// collar bounds is returned.
pub fn curve_length_lower(state: &ShortCurveState, target: &CurveId) -> Result<IntervalScalar> {
    if target.sheet() != Some(state.sheet) {
        return Err(Error::Unsupported(format!(
            "length estimator needs a same-sheet target, got {target}"
        )));
    }
    let mut best: Option<IntervalScalar> = None;
    for li in [&state.first, &state.second] {
        let i = intersection_number(&li.curve, target)?;
        if i == 0 {
            continue;
        }
        let w = collar_width(&IntervalScalar::point(li.hyp.hi().clone()))?;
        let bound = w
            .mul(&IntervalScalar::from_u64(2, w.prec()))
            .mul_integer(&i);
        best = Some(match best {
            Some(cur) if cur.lo() >= bound.lo() => cur,
            _ => bound,
        });
    }
    Ok(best.unwrap_or_else(|| IntervalScalar::zero(state.first.hyp.prec())))
}

/// Upper bound on the intersection number of two curves from their extremal
/// lengths: `i(a, b)^2 <= Ext(a) Ext(b)`.
pub fn minsky_intersection_bound(
    a_ext: &IntervalScalar,
    b_ext: &IntervalScalar,
) -> Result<IntervalScalar> {
    if !a_ext.is_positive() || !b_ext.is_positive() {
        return Err(Error::Domain("extremal lengths must be positive".into()));
    }
    IntervalScalar::point(a_ext.hi().clone())
        .mul(&IntervalScalar::point(b_ext.hi().clone()))
        .sqrt()
}

/// Order-of-magnitude bound for the hyperbolic length of an arc crossing the
/// expanding annulus, from the annulus-modulus bound: the hyperbolic radius
/// of the comparison annulus, `log((1 + cos u)/(1 - cos u))` with
/// `u = log(1/delta) / (2 Mod)`. Not certified (the comparison constants are
/// existential); used only in diagnostics.
pub fn crossing_arc_bound(mod_bound: &IntervalScalar, delta: f64) -> Result<IntervalScalar> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    if !mod_bound.is_positive() {
        return Err(Error::Domain("modulus bound must be positive".into()));
    }
    let prec = mod_bound.prec();
    let u = IntervalScalar::from_f64(delta, prec)
        .recip()?
        .ln()?
        .div(&mod_bound.mul(&IntervalScalar::from_u64(2, prec)))?;
    let half_pi = IntervalScalar::pi(prec).div(&IntervalScalar::from_u64(2, prec))?;
    if !(u.hi() < half_pi.lo()) {
        return Err(Error::Domain(format!(
            "crossing-arc argument u = {u} not certifiably below pi/2"
        )));
    }
    let c = u.cos();
    let one = IntervalScalar::one(prec);
    one.add(&c).div(&one.sub(&c))?.ln()
}
