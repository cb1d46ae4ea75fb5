//! The genus-2 surface glued from two unit square tori along a vertical
//! slit: curve identifiers, intersection numbers, slit geometry, the
//! embedded cylinder around a short curve, and the modulus bound for the
//! expanding annulus around the dividing curve.

use rug::{Integer, Rational};
use std::fmt;

use crate::contfrac::{approximation_gap_of, ContinuedFraction, Convergent};
use crate::error::{Error, Result};
use crate::flow::{flat_length_sq, FlowTime, LatticeVector};
use crate::numerics::IntervalScalar;

/// The two torus sheets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sheet {
    One,
    Two,
}

impl Sheet {
    pub fn index(&self) -> usize {
        match self {
            Sheet::One => 0,
            Sheet::Two => 1,
        }
    }

    pub fn other(&self) -> Sheet {
        match self {
            Sheet::One => Sheet::Two,
            Sheet::Two => Sheet::One,
        }
    }
}

impl fmt::Display for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Homotopy classes the length calculus knows about: lattice curves on a
/// sheet, the dividing curve `sigma` (union of the two slits), and the
/// fixed crossing curve `gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CurveId {
    SheetCurve { sheet: Sheet, vector: LatticeVector },
    Sigma,
    Gamma,
}

impl CurveId {
    /// `alpha_j`: the `(1, 0)`-curve on sheet `j`.
    pub fn alpha(sheet: Sheet) -> Self {
        CurveId::SheetCurve {
            sheet,
            vector: LatticeVector::from_i64(1, 0).expect("(1,0) is a valid vector"),
        }
    }

    pub fn sheet_curve(sheet: Sheet, vector: LatticeVector) -> Self {
        CurveId::SheetCurve { sheet, vector }
    }

    pub fn sheet(&self) -> Option<Sheet> {
        match self {
            CurveId::SheetCurve { sheet, .. } => Some(*sheet),
            _ => None,
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveId::SheetCurve { sheet, vector } => write!(f, "{vector}@S{sheet}"),
            CurveId::Sigma => write!(f, "sigma"),
            CurveId::Gamma => write!(f, "gamma"),
        }
    }
}

/// Geometric intersection number for the enumerated curve pairs.
///
/// Same-sheet lattice curves intersect in `|q_a p_b - p_a q_b|`; curves on
/// different sheets are disjoint; convergent-slope curves avoid the slit, so
/// lattice curves are disjoint from `sigma`; `gamma` crosses `sigma` twice
/// and meets a `(q, p)`-curve on either sheet in at most `|p| + 1` points
/// (one arc parallel to `alpha_j` per sheet plus one slit crossing).
pub fn intersection_number(a: &CurveId, b: &CurveId) -> Result<Integer> {
    use CurveId::*;
    match (a, b) {
        (
            SheetCurve {
                sheet: sa,
                vector: va,
            },
            SheetCurve {
                sheet: sb,
                vector: vb,
            },
        ) => {
            if sa == sb {
                Ok(va.det_abs(vb))
            } else {
                Ok(Integer::from(0))
            }
        }
        (SheetCurve { .. }, Sigma) | (Sigma, SheetCurve { .. }) => Ok(Integer::from(0)),
        (Sigma, Sigma) | (Gamma, Gamma) => Ok(Integer::from(0)),
        (Gamma, Sigma) | (Sigma, Gamma) => Ok(Integer::from(2)),
        (Gamma, SheetCurve { vector, .. }) | (SheetCurve { vector, .. }, Gamma) => {
            Ok(vector.p().clone().abs() + 1u32)
        }
    }
}

/// Configuration of the glued surface: two slopes and the slit length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlitSurfaceConfig {
    theta1: ContinuedFraction,
    theta2: ContinuedFraction,
    s: Rational,
}

impl SlitSurfaceConfig {
    pub fn new(theta1: ContinuedFraction, theta2: ContinuedFraction, s: Rational) -> Result<Self> {
        if s <= 0u32 || s >= 1u32 {
            return Err(Error::InvalidConfig(format!(
                "slit length must lie in (0, 1), got {s}"
            )));
        }
        Ok(Self { theta1, theta2, s })
    }

    pub fn theta(&self, sheet: Sheet) -> &ContinuedFraction {
        match sheet {
            Sheet::One => &self.theta1,
            Sheet::Two => &self.theta2,
        }
    }

    pub fn theta1(&self) -> &ContinuedFraction {
        &self.theta1
    }

    pub fn theta2(&self) -> &ContinuedFraction {
        &self.theta2
    }

    pub fn s(&self) -> &Rational {
        &self.s
    }
}

/// A planar vector of interval coordinates.
#[derive(Debug, Clone)]
pub struct FlatVector {
    pub x: IntervalScalar,
    pub y: IntervalScalar,
}

/// The slit at time `t`: the vertical vector `(0, s e^{-t/2})`.
pub fn slit_vector(s: &Rational, t: &FlowTime, bits: u32) -> FlatVector {
    let sv = IntervalScalar::from_rational(s, bits);
    let half = t
        .interval()
        .neg()
        .div(&IntervalScalar::from_u64(2, bits))
        .expect("2 is nonzero");
    FlatVector {
        x: IntervalScalar::zero(bits),
        y: sv.mul(&half.exp()),
    }
}

/// Flat length of `sigma` (two slits): `2 s e^{-t/2}`.
pub fn sigma_flat_length(s: &Rational, t: &FlowTime, bits: u32) -> IntervalScalar {
    slit_vector(s, t, bits)
        .y
        .mul(&IntervalScalar::from_u64(2, bits))
}

/// The embedded cylinder of curves parallel to a short curve that avoid the
/// slit.
#[derive(Debug, Clone)]
pub struct CylinderEstimate {
    pub area: IntervalScalar,
    pub length: IntervalScalar,
    pub modulus: IntervalScalar,
}

/// Largest embedded cylinder around the `(q_n, p_n)`-curve avoiding the slit:
/// area `1 - s |q_n theta - p_n| / sqrt(1 + theta^2)`, modulus area/length^2.
pub fn short_curve_cylinder(
    theta: &IntervalScalar,
    c: &Convergent,
    s: &Rational,
    t: &FlowTime,
) -> Result<CylinderEstimate> {
    let gap = approximation_gap_of(c, theta)?;
    cylinder_for_gap(theta, &LatticeVector::from(c), &gap, s, t)
}

/// Same construction for any primitive vector with the stated slit shadow;
/// the parallel family sweeps the full torus, so removing the slit's shadow
/// leaves one embedded cylinder whenever the area stays positive.
pub fn cylinder_for_gap(
    theta: &IntervalScalar,
    v: &LatticeVector,
    gap: &IntervalScalar,
    s: &Rational,
    t: &FlowTime,
) -> Result<CylinderEstimate> {
    let prec = theta.prec();
    let sv = IntervalScalar::from_rational(s, prec);
    let shadow = sv
        .mul(gap)
        .div(&IntervalScalar::one(prec).add(&theta.square()).sqrt()?)?;
    let area = IntervalScalar::one(prec).sub(&shadow);
    if !area.is_positive() {
        // empty-area slopes are a domain violation, a straddling enclosure
        // just needs refinement
        return Err(if area.hi().cmp0() != Some(std::cmp::Ordering::Greater) {
            Error::Domain(format!("slit shadow swallows the cylinder of {v}"))
        } else {
            Error::InsufficientPrecision(format!("cylinder area not certifiably positive for {v}"))
        });
    }
    let lsq = flat_length_sq(theta, v, t)?;
    let modulus = area.div(&lsq)?;
    Ok(CylinderEstimate {
        area,
        length: lsq.sqrt()?,
        modulus,
    })
}

/// Upper bound on the modulus of the maximal annulus around `sigma`:
/// `(log(4 R1 R2 / s^2) + t + 1) / 2`, valid for `r_j < R_j <= l_t` of the
/// sheet-j shortest curve.
pub fn annulus_modulus_bound(
    s: &Rational,
    t: &FlowTime,
    r1: &IntervalScalar,
    r2: &IntervalScalar,
) -> Result<IntervalScalar> {
    let prec = r1.prec().max(r2.prec());
    let inner = slit_vector(s, t, prec)
        .y
        .div(&IntervalScalar::from_u64(2, prec))?;
    for (j, r) in [(1, r1), (2, r2)] {
        if !(r.lo() > inner.hi()) {
            return Err(Error::Domain(format!(
                "outer radius R{j} = {r} not certifiably above the slit radius {inner}"
            )));
        }
    }
    let sv = IntervalScalar::from_rational(s, prec);
    let arg = IntervalScalar::from_u64(4, prec)
        .mul(r1)
        .mul(r2)
        .div(&sv.square())?;
    arg.ln()?
        .add(t.interval())
        .add(&IntervalScalar::one(prec))
        .div(&IntervalScalar::from_u64(2, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::ElementPattern;

    fn const3() -> ContinuedFraction {
        ContinuedFraction::new(3, ElementPattern::Const(3)).unwrap()
    }

    fn theta3() -> IntervalScalar {
        const3().theta_enclosure(256, 1e-40).unwrap()
    }

    fn v(q: i64, p: i64) -> CurveId {
        CurveId::sheet_curve(Sheet::One, LatticeVector::from_i64(q, p).unwrap())
    }

    #[test]
    fn intersection_examples() {
        // i((1,0), (3,10)) = 10, matching the determinant convention
        let i = intersection_number(&CurveId::alpha(Sheet::One), &v(3, 10)).unwrap();
        assert_eq!(i, Integer::from(10));
        // a curve with itself
        assert_eq!(intersection_number(&v(3, 10), &v(3, 10)).unwrap(), 0);
        // consecutive convergents cross once
        assert_eq!(intersection_number(&v(3, 10), &v(10, 33)).unwrap(), 1);
        // different sheets are disjoint
        let other = CurveId::sheet_curve(Sheet::Two, LatticeVector::from_i64(3, 10).unwrap());
        assert_eq!(intersection_number(&v(3, 10), &other).unwrap(), 0);
        // sigma cases
        assert_eq!(intersection_number(&v(3, 10), &CurveId::Sigma).unwrap(), 0);
        assert_eq!(
            intersection_number(&CurveId::Gamma, &CurveId::Sigma).unwrap(),
            2
        );
    }

    #[test]
    fn intersection_symmetry_and_bilinearity() {
        let pairs = [
            ((1i64, 0i64), (7i64, 23i64)),
            ((3, 10), (4, 13)),
            ((1, 3), (10, 33)),
        ];
        for ((qa, pa), (qb, pb)) in pairs {
            let a = v(qa, pa);
            let b = v(qb, pb);
            assert_eq!(
                intersection_number(&a, &b).unwrap(),
                intersection_number(&b, &a).unwrap()
            );
        }
        // i((1,0), (q,p)) = |p|
        for (q, p) in [(3i64, 10i64), (7, 23), (1, 3), (2097, 6940)] {
            assert_eq!(
                intersection_number(&CurveId::alpha(Sheet::One), &v(q, p)).unwrap(),
                Integer::from(p)
            );
        }
    }

    #[test]
    fn slit_vector_examples() {
        let s = Rational::from((1u32, 2u32));
        let t0 = FlowTime::from_f64(0.0, 256);
        let sv0 = slit_vector(&s, &t0, 256);
        assert!(sv0.y.contains_f64(0.5));
        let t = FlowTime::from_f64(4f64.ln(), 256);
        let sv = slit_vector(&s, &t, 256);
        crate::test_support::assert_near(&sv.y, 0.25, 1e-15);
        let sig = sigma_flat_length(&s, &t, 256);
        crate::test_support::assert_near(&sig, 0.5, 1e-15);
    }

    #[test]
    fn cylinder_at_t1() {
        // area = 1 - 0.5*0.09167308680401606/3.450844376844019
        //      = 0.9867172962914288, modulus = area / (2/sqrt 13)
        //      = 1.7788299030829701 (mpmath)
        let theta = theta3();
        let cf = const3();
        let c = cf.convergent(1).unwrap();
        let t1 = crate::flow::min_time(&theta, &c).unwrap();
        let s = Rational::from((1u32, 2u32));
        let cyl = short_curve_cylinder(&theta, &c, &s, &t1).unwrap();
        crate::test_support::assert_near(&cyl.area, 0.9867172962914288, 1e-12);
        crate::test_support::assert_near(&cyl.modulus, 1.7788299030829701, 1e-12);
        // modulus = area / length^2 at interval level
        let back = cyl.area.div(&cyl.length.square()).unwrap();
        assert!(back.overlaps(&cyl.modulus));
        // area bookkeeping: area + |u x v| encloses 1
        let gap = cf.approximation_gap(1, &theta).unwrap();
        let shadow = IntervalScalar::from_rational(&s, 256)
            .mul(&gap)
            .div(
                &IntervalScalar::one(256)
                    .add(&theta.square())
                    .sqrt()
                    .unwrap(),
            )
            .unwrap();
        crate::test_support::assert_near(&cyl.area.add(&shadow), 1.0, 1e-30);
    }

    #[test]
    fn cylinder_area_tends_to_one_as_s_vanishes() {
        let theta = theta3();
        let cf = const3();
        let c = cf.convergent(1).unwrap();
        let t1 = crate::flow::min_time(&theta, &c).unwrap();
        let tiny = Rational::from((1u32, 1_000_000u32));
        let cyl = short_curve_cylinder(&theta, &c, &tiny, &t1).unwrap();
        assert!(cyl.area.hi().to_f64() <= 1.0 + 1e-15);
        assert!(cyl.area.lo().to_f64() >= 1.0 - 1e-5);
    }

    #[test]
    fn annulus_bound_example_and_monotonicity() {
        // (log 4.8 + 11)/2 = 6.2843079589569226 (mpmath)
        let s = Rational::from((1u32, 2u32));
        let t = FlowTime::from_f64(10.0, 256);
        let r1 = IntervalScalar::from_f64(0.5, 256);
        let r2 = IntervalScalar::from_f64(0.6, 256);
        let b = annulus_modulus_bound(&s, &t, &r1, &r2).unwrap();
        crate::test_support::assert_near(&b, 6.2843079589569226, 1e-12);
        // monotone in t and in R1 R2
        let later = annulus_modulus_bound(&s, &FlowTime::from_f64(12.0, 256), &r1, &r2).unwrap();
        assert!(b.certainly_lt(&later));
        let bigger =
            annulus_modulus_bound(&s, &t, &r1, &IntervalScalar::from_f64(0.9, 256)).unwrap();
        assert!(b.certainly_lt(&bigger));
    }

    #[test]
    fn annulus_bound_rejects_radius_below_slit() {
        let s = Rational::from((1u32, 2u32));
        let t = FlowTime::from_f64(0.0, 256);
        let small = IntervalScalar::from_f64(0.1, 256); // slit radius is 0.25 at t=0
        let ok = IntervalScalar::from_f64(0.5, 256);
        assert!(matches!(
            annulus_modulus_bound(&s, &t, &small, &ok),
            Err(Error::Domain(_))
        ));
    }
}
