//! Self-validating interval arithmetic over configurable-precision reals.
//!
//! Every endpoint operation is performed with MPFR directed rounding, so a
//! result interval always encloses the exact real value. All downstream
//! estimates in this crate are enclosures, never bare floats.

use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, SubAssignRound};
use rug::{Float, Integer, Rational};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Working mantissa width and refinement goal for enclosures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    bits: u32,
    target_width: f64,
}

impl Precision {
    pub const DEFAULT_BITS: u32 = 256;
    pub const DEFAULT_TARGET_WIDTH: f64 = 1e-30;
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32, target_width: f64) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::InvalidConfig(format!(
                "precision bits must be >= {}, got {bits}",
                Self::MIN_BITS
            )));
        }
        if !(target_width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target width must be positive, got {target_width}"
            )));
        }
        Ok(Self { bits, target_width })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn target_width(&self) -> f64 {
        self.target_width
    }

    /// Precision for retry `level` (0 = self). Each level doubles the
    /// mantissa and sharpens the enclosure goal, so retried comparisons
    /// strictly gain information. The width goal never outruns what the
    /// mantissa can represent.
    pub fn refined(&self, level: u32) -> Self {
        let bits = self.bits.saturating_mul(1u32 << level.min(8));
        let mut target_width = self.target_width.powi(1 << level.min(4) as i32);
        let floor = 2f64.powi(-(bits.min(990) as i32 - 64));
        if !(target_width > floor) {
            target_width = floor;
        }
        Self { bits, target_width }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            bits: Self::DEFAULT_BITS,
            target_width: Self::DEFAULT_TARGET_WIDTH,
        }
    }
}

/// A closed real interval `[lo, hi]` with extended-precision endpoints.
///
/// Invariants: `lo <= hi`, both finite. If `x` is in `X` and `y` in `Y`
/// then `x op y` is in `X op Y` for every operation defined here.
#[derive(Clone)]
pub struct IntervalScalar {
    lo: Float,
    hi: Float,
}

fn refl(prec: u32, src: &Float, dir: Round) -> Float {
    Float::with_val_round(prec, src, dir).0
}

impl IntervalScalar {
    pub fn from_endpoints(lo: Float, hi: Float) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain("non-finite interval endpoint".into()));
        }
        if lo > hi {
            return Err(Error::Domain(format!(
                "inverted interval endpoints: lo={lo} > hi={hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    pub fn point(x: Float) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_f64(x: f64, bits: u32) -> Self {
        // f64 -> Float is exact at >= 53 bits.
        Self::point(Float::with_val(bits.max(Precision::MIN_BITS), x))
    }

    pub fn from_u64(x: u64, bits: u32) -> Self {
        Self::point(Float::with_val(bits, x))
    }

    pub fn from_integer(n: &Integer, bits: u32) -> Self {
        Self {
            lo: Float::with_val_round(bits, n, Round::Down).0,
            hi: Float::with_val_round(bits, n, Round::Up).0,
        }
    }

    pub fn from_int_ratio(num: &Integer, den: &Integer, bits: u32) -> Result<Self> {
        if den.cmp0() == Ordering::Equal {
            return Err(Error::Domain("zero denominator".into()));
        }
        let r = Rational::from((num.clone(), den.clone()));
        Ok(Self {
            lo: Float::with_val_round(bits, &r, Round::Down).0,
            hi: Float::with_val_round(bits, &r, Round::Up).0,
        })
    }

    pub fn from_rational(r: &Rational, bits: u32) -> Self {
        Self {
            lo: Float::with_val_round(bits, r, Round::Down).0,
            hi: Float::with_val_round(bits, r, Round::Up).0,
        }
    }

    pub fn zero(bits: u32) -> Self {
        Self::point(Float::with_val(bits, 0))
    }

    pub fn one(bits: u32) -> Self {
        Self::point(Float::with_val(bits, 1))
    }

    pub fn pi(bits: u32) -> Self {
        Self {
            lo: Float::with_val_round(bits, Constant::Pi, Round::Down).0,
            hi: Float::with_val_round(bits, Constant::Pi, Round::Up).0,
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn width(&self) -> Float {
        let mut w = refl(self.prec(), &self.hi, Round::Up);
        w.sub_assign_round(&self.lo, Round::Up);
        w
    }

    pub fn midpoint(&self) -> Float {
        let mut m = Float::with_val(self.prec(), &self.lo);
        m += &self.hi;
        m /= 2u32;
        m
    }

    pub fn to_f64_lo(&self) -> f64 {
        self.lo.to_f64_round(Round::Down)
    }

    pub fn to_f64_hi(&self) -> f64 {
        self.hi.to_f64_round(Round::Up)
    }

    pub fn to_f64_mid(&self) -> f64 {
        self.midpoint().to_f64()
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.cmp0() != Some(Ordering::Greater) && self.hi.cmp0() != Some(Ordering::Less)
    }

    pub fn is_positive(&self) -> bool {
        self.lo.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.hi.cmp0() == Some(Ordering::Less)
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// `true` when every point of `self` is below every point of `other`.
    pub fn certainly_lt(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    /// Total order on the exact values when the intervals are disjoint,
    /// `None` when they overlap.
    pub fn try_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.certainly_lt(other) {
            Some(Ordering::Less)
        } else if other.certainly_lt(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: if self.lo <= other.lo {
                self.lo.clone()
            } else {
                other.lo.clone()
            },
            hi: if self.hi >= other.hi {
                self.hi.clone()
            } else {
                other.hi.clone()
            },
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.lo.cmp0() != Some(Ordering::Less) {
            self.clone()
        } else if self.hi.cmp0() != Some(Ordering::Greater) {
            self.neg()
        } else {
            let hi = if self.hi.clone().abs() >= self.lo.clone().abs() {
                self.hi.clone().abs()
            } else {
                self.lo.clone().abs()
            };
            Self {
                lo: Float::with_val(self.prec(), 0),
                hi,
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let mut lo = refl(prec, &self.lo, Round::Down);
        lo.add_assign_round(&other.lo, Round::Down);
        let mut hi = refl(prec, &self.hi, Round::Up);
        hi.add_assign_round(&other.hi, Round::Up);
        Self { lo, hi }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let mut lo = refl(prec, &self.lo, Round::Down);
        lo.sub_assign_round(&other.hi, Round::Down);
        let mut hi = refl(prec, &self.hi, Round::Up);
        hi.sub_assign_round(&other.lo, Round::Up);
        Self { lo, hi }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let mut d = refl(prec, a, Round::Down);
            d.mul_assign_round(b, Round::Down);
            let mut u = refl(prec, a, Round::Up);
            u.mul_assign_round(b, Round::Up);
            lo = Some(match lo {
                Some(cur) if cur <= d => cur,
                _ => d,
            });
            hi = Some(match hi {
                Some(cur) if cur >= u => cur,
                _ => u,
            });
        }
        Self {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
    }

    /// Tight square: `[0, max(lo^2, hi^2)]` when the interval straddles zero.
    pub fn square(&self) -> Self {
        let prec = self.prec();
        let sq = |x: &Float, dir: Round| {
            let mut r = refl(prec, x, dir);
            let x2 = x.clone();
            r.mul_assign_round(&x2, dir);
            r
        };
        if self.lo.cmp0() != Some(Ordering::Less) {
            Self {
                lo: sq(&self.lo, Round::Down),
                hi: sq(&self.hi, Round::Up),
            }
        } else if self.hi.cmp0() != Some(Ordering::Greater) {
            Self {
                lo: sq(&self.hi, Round::Down),
                hi: sq(&self.lo, Round::Up),
            }
        } else {
            let a = sq(&self.lo, Round::Up);
            let b = sq(&self.hi, Round::Up);
            Self {
                lo: Float::with_val(prec, 0),
                hi: if a >= b { a } else { b },
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.contains_zero() {
            return Err(Error::Domain(format!(
                "division by an interval containing zero: [{}, {}]",
                other.lo, other.hi
            )));
        }
        let prec = self.prec().max(other.prec());
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let mut d = refl(prec, a, Round::Down);
            d.div_assign_round(b, Round::Down);
            let mut u = refl(prec, a, Round::Up);
            u.div_assign_round(b, Round::Up);
            lo = Some(match lo {
                Some(cur) if cur <= d => cur,
                _ => d,
            });
            hi = Some(match hi {
                Some(cur) if cur >= u => cur,
                _ => u,
            });
        }
        Ok(Self {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.prec()).div(self)
    }

    pub fn exp(&self) -> Self {
        let mut lo = self.lo.clone();
        lo.exp_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.exp_round(Round::Up);
        Self { lo, hi }
    }

    pub fn ln(&self) -> Result<Self> {
        if self.lo.cmp0() != Some(Ordering::Greater) {
            return Err(Error::Domain(format!(
                "log of a non-positive interval: [{}, {}]",
                self.lo, self.hi
            )));
        }
        let mut lo = self.lo.clone();
        lo.ln_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.ln_round(Round::Up);
        Ok(Self { lo, hi })
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo.cmp0() == Some(Ordering::Less) {
            return Err(Error::Domain(format!(
                "sqrt of an interval with negative points: [{}, {}]",
                self.lo, self.hi
            )));
        }
        let mut lo = self.lo.clone();
        lo.sqrt_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.sqrt_round(Round::Up);
        Ok(Self { lo, hi })
    }

    pub fn sinh(&self) -> Self {
        let mut lo = self.lo.clone();
        lo.sinh_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.sinh_round(Round::Up);
        Self { lo, hi }
    }

    pub fn asinh(&self) -> Self {
        let mut lo = self.lo.clone();
        lo.asinh_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.asinh_round(Round::Up);
        Self { lo, hi }
    }

    /// Enclosure of the cosine. Tight when the interval is certifiably
    /// inside `[0, pi]` (the only case this crate evaluates); otherwise
    /// falls back to the sound hull `[-1, 1]`.
    pub fn cos(&self) -> Self {
        let prec = self.prec();
        let pi = Self::pi(prec);
        if self.lo.cmp0() != Some(Ordering::Less) && self.hi <= pi.lo {
            let mut lo = self.hi.clone();
            lo.cos_round(Round::Down);
            let mut hi = self.lo.clone();
            hi.cos_round(Round::Up);
            let one = Float::with_val(prec, 1);
            if hi > one {
                hi = one;
            }
            let neg_one = Float::with_val(prec, -1);
            if lo < neg_one {
                lo = neg_one;
            }
            Self { lo, hi }
        } else {
            Self {
                lo: Float::with_val(prec, -1),
                hi: Float::with_val(prec, 1),
            }
        }
    }

    pub fn acos(&self) -> Result<Self> {
        let prec = self.prec();
        let one = Float::with_val(prec, 1);
        let neg_one = Float::with_val(prec, -1);
        if self.lo < neg_one || self.hi > one {
            return Err(Error::Domain(format!(
                "acos argument outside [-1, 1]: [{}, {}]",
                self.lo, self.hi
            )));
        }
        let mut lo = self.hi.clone();
        lo.acos_round(Round::Down);
        let mut hi = self.lo.clone();
        hi.acos_round(Round::Up);
        if lo.cmp0() == Some(Ordering::Less) {
            lo = Float::with_val(prec, 0);
        }
        Ok(Self { lo, hi })
    }

    pub fn mul_integer(&self, n: &Integer) -> Self {
        self.mul(&Self::from_integer(n, self.prec()))
    }

    pub fn add_integer(&self, n: &Integer) -> Self {
        self.add(&Self::from_integer(n, self.prec()))
    }
}

impl fmt::Debug for IntervalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.to_f64_lo(), self.to_f64_hi())
    }
}

impl fmt::Display for IntervalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.to_f64_lo(), self.to_f64_hi())
    }
}

/// Binary operator tags for the dispatch entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Unary operator tags for the dispatch entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Asinh,
    Cos,
    Acos,
}

pub fn interval_arith(
    x: &IntervalScalar,
    y: &IntervalScalar,
    op: BinaryOp,
) -> Result<IntervalScalar> {
    match op {
        BinaryOp::Add => Ok(x.add(y)),
        BinaryOp::Sub => Ok(x.sub(y)),
        BinaryOp::Mul => Ok(x.mul(y)),
        BinaryOp::Div => x.div(y),
    }
}

pub fn interval_unary(x: &IntervalScalar, op: UnaryOp) -> Result<IntervalScalar> {
    match op {
        UnaryOp::Exp => Ok(x.exp()),
        UnaryOp::Ln => x.ln(),
        UnaryOp::Sqrt => x.sqrt(),
        UnaryOp::Sinh => Ok(x.sinh()),
        UnaryOp::Asinh => Ok(x.asinh()),
        UnaryOp::Cos => Ok(x.cos()),
        UnaryOp::Acos => x.acos(),
    }
}

/// Certain sign of an interval, `None` when it straddles zero.
fn certain_sign(x: &IntervalScalar) -> Option<Ordering> {
    if x.is_positive() {
        Some(Ordering::Greater)
    } else if x.is_negative() {
        Some(Ordering::Less)
    } else {
        None
    }
}

/// Bracketing bisection for a monotone function with certified sign checks.
///
/// Returns an interval of width at most `tol` that provably contains the
/// unique root in `[lo, hi]`. The sign-change invariant
/// `f(lo_out) * f(hi_out) <= 0` is maintained at every step.
pub fn bisect_root<F>(f: F, lo: &Float, hi: &Float, tol: &Float) -> Result<IntervalScalar>
where
    F: Fn(&IntervalScalar) -> Result<IntervalScalar>,
{
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    if !(tol.cmp0() == Some(Ordering::Greater)) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let prec = lo.prec().max(hi.prec());
    let sign_at = |x: &Float| -> Result<Option<Ordering>> {
        let v = f(&IntervalScalar::point(x.clone()))?;
        Ok(certain_sign(&v))
    };
    let s_lo = sign_at(lo)?
        .ok_or_else(|| Error::InsufficientPrecision(format!("sign of f({lo}) undecidable")))?;
    let s_hi = sign_at(hi)?
        .ok_or_else(|| Error::InsufficientPrecision(format!("sign of f({hi}) undecidable")))?;
    if s_lo == s_hi {
        return Err(Error::NoSignChange {
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }

    let mut a = lo.clone();
    let mut b = hi.clone();
    let max_iters = 64 + 4 * prec as usize;
    for _ in 0..max_iters {
        let mut w = Float::with_val(prec, &b);
        w -= &a;
        if w <= *tol {
            return IntervalScalar::from_endpoints(a, b);
        }
        // Probe the midpoint, then two offset points if the sign there is
        // undecidable (the root can sit arbitrarily close to any probe).
        let mut placed = false;
        for num in [2u32, 4, 8] {
            let mut m = Float::with_val(prec, &b);
            m -= &a;
            if num == 2 {
                m /= 2u32;
            } else {
                m /= num;
                m *= num - 1;
            }
            m += &a;
            if m <= a || m >= b {
                break;
            }
            match sign_at(&m)? {
                Some(s) if s == s_lo => {
                    a = m;
                    placed = true;
                    break;
                }
                Some(_) => {
                    b = m;
                    placed = true;
                    break;
                }
                None => continue,
            }
        }
        if !placed {
            return Err(Error::InsufficientPrecision(
                "root sign undecidable at every probe point".into(),
            ));
        }
    }
    Err(Error::InsufficientPrecision(format!(
        "bisection did not reach tolerance {tol} within {max_iters} steps"
    )))
}
