//! The one-parameter flow on the integer lattice induced by a slope:
//! flat lengths, minimizing times, prediction of the shortest and
//! second-shortest vectors, and an exhaustive-search oracle that certifies
//! the predictions.

use rug::Integer;
use std::cmp::Ordering;
use std::fmt;

use crate::contfrac::{ContinuedFraction, Convergent};
use crate::error::{Error, Result};
use crate::numerics::IntervalScalar;

/// A nonzero integer vector `(q, p)`, reported with `q >= 0` and `p >= 0`
/// when `q = 0`; `v` and `-v` are identified (curves are unoriented).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector {
    q: Integer,
    p: Integer,
}

impl LatticeVector {
    pub fn new(q: Integer, p: Integer) -> Result<Self> {
        if q.cmp0() == Ordering::Equal && p.cmp0() == Ordering::Equal {
            return Err(Error::Domain("zero vector has no curve semantics".into()));
        }
        let flip = match q.cmp0() {
            Ordering::Less => true,
            Ordering::Equal => p.cmp0() == Ordering::Less,
            Ordering::Greater => false,
        };
        if flip {
            Ok(Self { q: -q, p: -p })
        } else {
            Ok(Self { q, p })
        }
    }

    pub fn from_i64(q: i64, p: i64) -> Result<Self> {
        Self::new(Integer::from(q), Integer::from(p))
    }

    pub fn q(&self) -> &Integer {
        &self.q
    }

    pub fn p(&self) -> &Integer {
        &self.p
    }

    pub fn is_primitive(&self) -> bool {
        Integer::from(self.q.gcd_ref(&self.p)) == 1
    }

    /// `|q_a p_b - p_a q_b|`, the torus intersection number.
    pub fn det_abs(&self, other: &Self) -> Integer {
        let d = Integer::from(&self.q * &other.p) - Integer::from(&self.p * &other.q);
        d.abs()
    }
}

impl From<&Convergent> for LatticeVector {
    fn from(c: &Convergent) -> Self {
        // convergents have q >= 1
        Self {
            q: c.q().clone(),
            p: c.p().clone(),
        }
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.p)
    }
}

/// Provenance of a flow time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeTag {
    Generic,
    /// Minimizing time of convergent `index`.
    MinTime {
        index: usize,
    },
    /// `t_{2k}` of a ratio-trace scenario; minimizing time of convergent `index`.
    EvenSequence {
        k: usize,
        index: usize,
    },
    /// `t_{2k+1}` of a ratio-trace scenario, built from convergent `index`.
    OddSequence {
        k: usize,
        index: usize,
    },
}

/// A log-scale flow time with provenance.
#[derive(Debug, Clone)]
pub struct FlowTime {
    t: IntervalScalar,
    tag: TimeTag,
}

impl FlowTime {
    pub fn new(t: IntervalScalar, tag: TimeTag) -> Result<Self> {
        if !t.lo().is_finite() {
            return Err(Error::Domain(
                "flow time must have a finite lower endpoint".into(),
            ));
        }
        Ok(Self { t, tag })
    }

    pub fn generic(t: IntervalScalar) -> Result<Self> {
        Self::new(t, TimeTag::Generic)
    }

    pub fn from_f64(t: f64, bits: u32) -> Self {
        Self {
            t: IntervalScalar::from_f64(t, bits),
            tag: TimeTag::Generic,
        }
    }

    pub fn interval(&self) -> &IntervalScalar {
        &self.t
    }

    pub fn tag(&self) -> &TimeTag {
        &self.tag
    }

    pub fn retagged(&self, tag: TimeTag) -> Self {
        Self {
            t: self.t.clone(),
            tag,
        }
    }
}

/// `l_t(v)^2 = ((q + theta p)^2 e^{-t} + e^t (p - theta q)^2) / (1 + theta^2)`.
pub fn flat_length_sq(
    theta: &IntervalScalar,
    v: &LatticeVector,
    t: &FlowTime,
) -> Result<IntervalScalar> {
    let prec = theta.prec();
    let a = IntervalScalar::from_integer(&v.q, prec).add(&theta.mul_integer(&v.p));
    let b = IntervalScalar::from_integer(&v.p, prec).sub(&theta.mul_integer(&v.q));
    let em = t.interval().neg().exp();
    let ep = t.interval().exp();
    let num = a.square().mul(&em).add(&b.square().mul(&ep));
    num.div(&IntervalScalar::one(prec).add(&theta.square()))
}

/// Enclosure of `p_n theta + q_n` (always positive here).
fn height(theta: &IntervalScalar, c: &Convergent) -> IntervalScalar {
    theta
        .mul_integer(c.p())
        .add(&IntervalScalar::from_integer(c.q(), theta.prec()))
}

/// `T_n = log((p_n theta + q_n) / |q_n theta - p_n|)`, the time at which the
/// convergent's flat length is minimal.
pub fn min_time(theta: &IntervalScalar, c: &Convergent) -> Result<FlowTime> {
    let gap = crate::contfrac::approximation_gap_of(c, theta)?;
    let h = height(theta, c);
    let t = h.div(&gap)?.ln()?;
    FlowTime::new(t, TimeTag::MinTime { index: c.n() })
}

/// `l_{T_n}^2 = 2 (q_n + p_n theta) |q_n theta - p_n| / (1 + theta^2)`.
pub fn min_length_sq(theta: &IntervalScalar, c: &Convergent) -> Result<IntervalScalar> {
    let prec = theta.prec();
    let gap = crate::contfrac::approximation_gap_of(c, theta)?;
    let h = height(theta, c);
    let two = IntervalScalar::from_u64(2, prec);
    two.mul(&h)
        .mul(&gap)
        .div(&IntervalScalar::one(prec).add(&theta.square()))
}

/// Validity threshold of the shortest-vector classification,
/// `log((1 + a0 theta) / (theta - a0))`; below it non-convergent vectors can
/// still be shortest.
pub fn classification_threshold(theta: &IntervalScalar, a0: u64) -> Result<IntervalScalar> {
    let prec = theta.prec();
    let a0i = IntervalScalar::from_u64(a0, prec);
    let num = IntervalScalar::one(prec).add(&a0i.mul(theta));
    let den = theta.sub(&a0i);
    if !den.is_positive() {
        return Err(Error::InsufficientPrecision(
            "theta - a0 not certifiably positive".into(),
        ));
    }
    num.div(&den)?.ln()
}

/// Outcome of a shortest-vector prediction.
#[derive(Debug, Clone)]
pub struct ShortestPrediction {
    pub convergent: Convergent,
    /// Set when another candidate's length interval overlaps the winner's
    /// at the working precision (reported tie).
    pub tie_with: Option<Convergent>,
}

/// The shortest vector for `t` in `[T_n, T_{n+1}]` is a convergent; this
/// picks the shorter of the bracketing candidates by interval comparison.
pub fn predicted_shortest(
    cf: &ContinuedFraction,
    theta: &IntervalScalar,
    t: &FlowTime,
) -> Result<ShortestPrediction> {
    let threshold = classification_threshold(theta, cf.a0())?;
    if t.interval().lo() < threshold.hi() {
        return Err(Error::BelowThreshold {
            t: format!("{:e}", t.interval().to_f64_lo()),
            threshold: format!("{:e}", threshold.to_f64_hi()),
        });
    }

    // Collect all convergent indices whose bracket [T_n, T_{n+1}] may
    // contain t; ambiguity at the bracket boundaries just enlarges the
    // candidate set.
    let mut candidates: Vec<usize> = Vec::new();
    let mut n = 0usize;
    let mut t_n = min_time(theta, &cf.convergent(0)?)?;
    const MAX_INDEX: usize = 10_000;
    loop {
        let t_next = min_time(theta, &cf.convergent(n + 1)?)?;
        let possible =
            t_n.interval().lo() <= t.interval().hi() && t.interval().lo() <= t_next.interval().hi();
        if possible {
            candidates.push(n);
            candidates.push(n + 1);
        }
        if t_next.interval().lo() > t.interval().hi() {
            break;
        }
        n += 1;
        if n > MAX_INDEX {
            return Err(Error::InsufficientPrecision(
                "bracket search exceeded the index cap".into(),
            ));
        }
        t_n = t_next;
    }
    candidates.dedup();
    if candidates.is_empty() {
        // t >= threshold = T_0, so the first bracket always applies.
        candidates.push(0);
    }

    let mut lengths: Vec<(usize, IntervalScalar)> = Vec::new();
    for &idx in &candidates {
        let c = cf.convergent(idx)?;
        let l = flat_length_sq(theta, &LatticeVector::from(&c), t)?;
        lengths.push((idx, l));
    }
    lengths.sort_by(|a, b| {
        a.1.lo()
            .partial_cmp(b.1.lo())
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let (win_idx, win_len) = lengths[0].clone();
    let tie_with = lengths
        .iter()
        .skip(1)
        .find(|(_, l)| l.overlaps(&win_len))
        .map(|(idx, _)| cf.convergent(*idx))
        .transpose()?;
    Ok(ShortestPrediction {
        convergent: cf.convergent(win_idx)?,
        tie_with,
    })
}

/// All vectors that can be second-shortest while convergent `n` is shortest:
/// the neighbour convergents plus the two one-parameter families
/// `a c_n + c_{n-1}` (slope on the convergent's side) and `a c_n - c_{n-1}`
/// (mirror side), restricted to the coordinate window
/// `q_{n-1} + q_n <= q < q_{n+1}`, `p_{n-1} + p_n <= p < p_{n+1}`.
///
/// For `n = 0` the recurrence seeds `(q_{-1}, p_{-1}) = (0, 1)` play the
/// role of the previous convergent, which the exhaustive oracle confirms.
pub fn second_shortest_candidates(cf: &ContinuedFraction, n: usize) -> Result<Vec<LatticeVector>> {
    let cs = cf.convergents(n + 1)?;
    let (prev_q, prev_p) = if n == 0 {
        (Integer::from(0), Integer::from(1))
    } else {
        (cs[n - 1].q().clone(), cs[n - 1].p().clone())
    };
    let (cur, next) = (&cs[n], &cs[n + 1]);
    let a_next = cf.element(n as u64 + 1)?;

    let q_lo = Integer::from(&prev_q + cur.q());
    let p_lo = Integer::from(&prev_p + cur.p());
    let in_window =
        |q: &Integer, p: &Integer| *q >= q_lo && q < next.q() && *p >= p_lo && p < next.p();

    let mut out: Vec<LatticeVector> = vec![
        LatticeVector::new(prev_q.clone(), prev_p.clone())?,
        LatticeVector::from(next),
    ];
    for a in 1..a_next {
        let q = Integer::from(cur.q() * a) + &prev_q;
        let p = Integer::from(cur.p() * a) + &prev_p;
        if in_window(&q, &p) {
            out.push(LatticeVector::new(q, p)?);
        }
    }
    for a in 2..=a_next {
        let q = Integer::from(cur.q() * a) - &prev_q;
        let p = Integer::from(cur.p() * a) - &prev_p;
        if q.cmp0() == Ordering::Greater && in_window(&q, &p) {
            out.push(LatticeVector::new(q, p)?);
        }
    }
    out.sort();
    out.dedup();
    debug_assert!(out.iter().all(|v| v.is_primitive()));
    Ok(out)
}

/// Result of the exhaustive search: the `k` shortest primitive vectors (one
/// representative per sign pair) ordered by flat length, plus the pairs
/// whose length intervals overlap (reported ties).
#[derive(Debug, Clone)]
pub struct KShortest {
    pub items: Vec<(LatticeVector, IntervalScalar)>,
    pub ties: Vec<(usize, usize)>,
}

// ---------------------------------------------------------------------------
// exhaustive oracle
// ---------------------------------------------------------------------------

/// f64 interval with outward rounding, used only as a candidate prefilter;
/// every discarded vector is discarded on a certified comparison, and the
/// surviving pool is re-evaluated in full precision.
#[derive(Debug, Clone, Copy)]
struct F64I {
    lo: f64,
    hi: f64,
}

impl F64I {
    fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    fn from_interval(x: &IntervalScalar) -> Self {
        Self {
            lo: x.to_f64_lo(),
            hi: x.to_f64_hi(),
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }

    fn sub(self, o: Self) -> Self {
        Self {
            lo: (self.lo - o.hi).next_down(),
            hi: (self.hi - o.lo).next_up(),
        }
    }

    fn mul(self, o: Self) -> Self {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let mut lo = c[0];
        let mut hi = c[0];
        for &x in &c[1..] {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        Self {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    fn square(self) -> Self {
        if self.lo >= 0.0 {
            Self {
                lo: (self.lo * self.lo).next_down(),
                hi: (self.hi * self.hi).next_up(),
            }
        } else if self.hi <= 0.0 {
            Self {
                lo: (self.hi * self.hi).next_down(),
                hi: (self.lo * self.lo).next_up(),
            }
        } else {
            Self {
                lo: 0.0,
                hi: (self.lo * self.lo).max(self.hi * self.hi).next_up(),
            }
        }
    }
}

struct Scan {
    theta: F64I,
    /// e^{t} and e^{-t}, certified in MPFR then directed-rounded to f64.
    et: F64I,
    emt: F64I,
    /// Upper bounds on e^{t/2} and e^{-t/2} for the window radius.
    et2_hi: f64,
    emt2_hi: f64,
    one_theta_sq_lo: f64,
}

impl Scan {
    /// `M(q, p) = l^2 (1 + theta^2) = (q + theta p)^2 e^{-t} + (p - theta q)^2 e^t`.
    fn m(&self, q: i64, p: i64) -> F64I {
        let qf = F64I::point(q as f64);
        let pf = F64I::point(p as f64);
        let a = qf.add(self.theta.mul(pf));
        let b = pf.sub(self.theta.mul(qf));
        a.square().mul(self.emt).add(b.square().mul(self.et))
    }

    /// Every vector with `M <= m_cap` has `|p - theta q| <= rad_gap(m_cap)`.
    fn rad_gap(&self, m_cap: f64) -> f64 {
        (m_cap.max(0.0).sqrt().next_up() * self.emt2_hi).next_up()
    }

    /// Every vector with `M <= m_cap` has `0 <= q <= q_bound(m_cap)`:
    /// q (1 + theta^2) = (q + theta p) - theta (p - theta q) <= B1 + theta B2.
    fn q_bound(&self, m_cap: f64) -> f64 {
        if !m_cap.is_finite() {
            return f64::INFINITY;
        }
        let rm = m_cap.max(0.0).sqrt().next_up();
        let b1 = (rm * self.et2_hi).next_up();
        let b2 = (rm * self.emt2_hi).next_up();
        ((b1 + (self.theta.hi * b2).next_up()).next_up() / self.one_theta_sq_lo).next_up()
    }
}

/// The `k` shortest primitive vectors at time `t`, certified by exhaustive
/// enumeration. `window` caps the lattice strip the search may sweep
/// (`0 <= q <= window`); if certification needs a wider strip the call fails
/// with `WindowTooSmall` rather than guessing.
pub fn brute_force_k_shortest(
    theta: &IntervalScalar,
    t: &FlowTime,
    window: u64,
    k: usize,
) -> Result<KShortest> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if !theta.is_positive() {
        return Err(Error::Domain("slope must be positive".into()));
    }
    let prec = theta.prec();
    let et_iv = t.interval().exp();
    let emt_iv = t.interval().neg().exp();
    let half = t.interval().div(&IntervalScalar::from_u64(2, prec))?;
    let scan = Scan {
        theta: F64I::from_interval(theta),
        et: F64I::from_interval(&et_iv),
        emt: F64I::from_interval(&emt_iv),
        et2_hi: half.exp().to_f64_hi(),
        emt2_hi: half.neg().exp().to_f64_hi(),
        one_theta_sq_lo: (1.0 + theta.to_f64_lo() * theta.to_f64_lo()).next_down(),
    };
    let theta_mid = 0.5 * (scan.theta.lo + scan.theta.hi);

    // Phase A: cheap sweep along p ~ theta q to obtain an upper bound on the
    // k-th shortest squared length (scaled by 1 + theta^2).
    let mut best: Vec<(f64, i64, i64)> = Vec::new(); // (M.hi, q, p)
    let push_candidate = |best: &mut Vec<(f64, i64, i64)>, m_hi: f64, q: i64, p: i64| {
        if best.len() < k || m_hi < best.last().unwrap().0 {
            best.push((m_hi, q, p));
            best.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
            if best.len() > k {
                best.truncate(k);
            }
        }
    };
    push_candidate(&mut best, scan.m(0, 1).hi, 0, 1);
    let mut q: i64 = 1;
    loop {
        let center = theta_mid * q as f64;
        for dp in -2i64..=2 {
            let p = center.round() as i64 + dp;
            if gcd_i64(q, p) != 1 {
                continue;
            }
            push_candidate(&mut best, scan.m(q, p).hi, q, p);
        }
        let cap = if best.len() == k {
            best.last().unwrap().0
        } else {
            f64::INFINITY
        };
        let qb = scan.q_bound(cap);
        if (q as f64) >= qb {
            break;
        }
        if q as u64 >= window {
            return Err(Error::WindowTooSmall {
                needed: if qb.is_finite() {
                    qb as u64 + 1
                } else {
                    u64::MAX
                },
                window,
            });
        }
        q += 1;
    }
    let m_cap = best.last().unwrap().0;

    // Phase B: certified sweep. Any vector at least as short as the current
    // k-th candidate satisfies |p - theta q| <= sqrt(m_cap) e^{-t/2} and
    // |q + theta p| <= sqrt(m_cap) e^{t/2}, so the windows below cover it.
    let b2 = scan.rad_gap(m_cap);
    let q_max_f = scan.q_bound(m_cap);
    if !q_max_f.is_finite() || q_max_f >= window as f64 {
        return Err(Error::WindowTooSmall {
            needed: if q_max_f.is_finite() {
                q_max_f as u64 + 1
            } else {
                u64::MAX
            },
            window,
        });
    }
    let q_max = q_max_f.ceil() as i64;
    let mut pool: Vec<(i64, i64)> = vec![(0, 1)];
    for q in 1..=q_max {
        let p_lo = ((scan.theta.lo * q as f64).next_down() - b2).floor() as i64 - 1;
        let p_hi = ((scan.theta.hi * q as f64).next_up() + b2).ceil() as i64 + 1;
        for p in p_lo..=p_hi {
            if gcd_i64(q, p) != 1 {
                continue;
            }
            let m = scan.m(q, p);
            if m.lo <= m_cap {
                pool.push((q, p));
            }
        }
    }

    // Full-precision evaluation of the pool and certified selection.
    let mut certified: Vec<(LatticeVector, IntervalScalar)> = Vec::with_capacity(pool.len());
    for (q, p) in pool {
        let v = LatticeVector::from_i64(q, p)?;
        let l = flat_length_sq(theta, &v, t)?;
        certified.push((v, l));
    }
    certified.sort_by(|a, b| {
        a.1.lo()
            .partial_cmp(b.1.lo())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    if certified.len() < k {
        return Err(Error::WindowTooSmall {
            needed: q_max as u64 + 1,
            window,
        });
    }

    // Completeness re-check with the certified k-th length: its enclosure
    // must not allow vectors beyond the swept strip.
    let kth_hi = certified[k - 1].1.hi().to_f64_round(rug::float::Round::Up);
    let one_theta_sq_hi = (1.0 + theta.to_f64_hi() * theta.to_f64_hi()).next_up();
    let m_kth = (kth_hi * one_theta_sq_hi).next_up();
    if scan.q_bound(m_kth) > q_max_f || scan.rad_gap(m_kth) > b2 {
        return Err(Error::InsufficientPrecision(
            "oracle completeness re-check failed".into(),
        ));
    }

    let mut ties = Vec::new();
    let upto = (k + 1).min(certified.len());
    for i in 0..upto {
        for j in (i + 1)..upto {
            if certified[i].1.overlaps(&certified[j].1) && (i < k || j < k) {
                ties.push((i, j));
            }
        }
    }
    certified.truncate(k);
    Ok(KShortest {
        items: certified,
        ties,
    })
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::{parse_slope, ElementPattern};

    fn const3() -> ContinuedFraction {
        ContinuedFraction::new(3, ElementPattern::Const(3)).unwrap()
    }

    fn theta3() -> IntervalScalar {
        const3().theta_enclosure(256, 1e-40).unwrap()
    }

    #[test]
    fn flat_length_at_zero_is_euclidean() {
        let theta = theta3();
        let t = FlowTime::from_f64(0.0, 256);
        let v = LatticeVector::from_i64(3, 10).unwrap();
        let l = flat_length_sq(&theta, &v, &t).unwrap();
        assert!(l.contains_f64(109.0));
        assert!(l.width().to_f64() < 1e-20);
    }

    #[test]
    fn min_time_examples() {
        // T_1 = log((10 theta + 3)/(10 - 3 theta))
        //     = 5.973816086435546520559654142595 (mpmath)
        let theta = theta3();
        let t1 = min_time(&theta, &const3().convergent(1).unwrap()).unwrap();
        crate::test_support::assert_near(t1.interval(), 5.9738160864355465, 1e-12);
        assert!(t1.interval().width().to_f64() <= 1e-9);
        // T_0 = 3 log theta = 3.584289651861327912335792485557 (mpmath)
        let t0 = min_time(&theta, &const3().convergent(0).unwrap()).unwrap();
        crate::test_support::assert_near(t0.interval(), 3.584289651861328, 1e-12);
        let three_log = theta.ln().unwrap().mul(&IntervalScalar::from_u64(3, 256));
        assert!(t0.interval().overlaps(&three_log));
    }

    #[test]
    fn min_times_strictly_increase() {
        let theta = theta3();
        let cf = const3();
        let mut prev = min_time(&theta, &cf.convergent(0).unwrap()).unwrap();
        for n in 1..=20 {
            let cur = min_time(&theta, &cf.convergent(n).unwrap()).unwrap();
            assert!(
                prev.interval().certainly_lt(cur.interval()),
                "T_{} not below T_{n}",
                n - 1
            );
            prev = cur;
        }
    }

    #[test]
    fn min_length_constant_for_golden_like_slope() {
        // (q_n + p_n theta)|q_n theta - p_n| = theta for every n when
        // theta^2 = 3 theta + 1, so the minimal length^2 is 2/sqrt(13)
        // = 0.5547001962252291 at every index.
        let theta = theta3();
        let cf = const3();
        for n in 0..=10 {
            let c = cf.convergent(n).unwrap();
            let m = min_length_sq(&theta, &c).unwrap();
            crate::test_support::assert_near(&m, 0.5547001962252291, 1e-13);
            assert!(m.width().to_f64() <= 1e-12, "n={n}");
            // cross-check against the length formula at T_n
            let tn = min_time(&theta, &c).unwrap();
            let l = flat_length_sq(&theta, &LatticeVector::from(&c), &tn).unwrap();
            assert!(l.overlaps(&m), "n={n}");
        }
    }

    #[test]
    fn flat_length_min_at_flow_time_and_convex() {
        let theta = theta3();
        let c = const3().convergent(2).unwrap();
        let v = LatticeVector::from(&c);
        let tn = min_time(&theta, &c).unwrap();
        let t0 = tn.interval().to_f64_mid();
        let at = |t: f64| {
            flat_length_sq(&theta, &v, &FlowTime::from_f64(t, 256))
                .unwrap()
                .to_f64_mid()
        };
        let m = at(t0);
        assert!(at(t0 - 0.3) > m && at(t0 + 0.3) > m);
        // strict convexity in e^t: positive second difference on a geometric grid
        for base in [t0 - 1.0, t0, t0 + 1.0] {
            let (f0, f1, f2) = (at(base - 0.1), at(base), at(base + 0.1));
            // convexity in t is implied near the minimum; in e^t everywhere:
            let (x0, x1, x2) = ((base - 0.1f64).exp(), base.exp(), (base + 0.1f64).exp());
            let slope1 = (f1 - f0) / (x1 - x0);
            let slope2 = (f2 - f1) / (x2 - x1);
            assert!(slope2 > slope1);
        }
    }

    #[test]
    fn threshold_matches_t0() {
        let theta = theta3();
        let thr = classification_threshold(&theta, 3).unwrap();
        crate::test_support::assert_near(&thr, 3.584289651861328, 1e-12);
    }

    #[test]
    fn predicted_shortest_at_t1() {
        let cf = const3();
        let theta = theta3();
        let t1 = min_time(&theta, &cf.convergent(1).unwrap()).unwrap();
        let p = predicted_shortest(&cf, &theta, &t1).unwrap();
        assert_eq!(p.convergent.n(), 1);
        assert!(p.tie_with.is_none());
    }

    #[test]
    fn predicted_shortest_mid_bracket() {
        let cf = const3();
        let theta = theta3();
        let t1 = min_time(&theta, &cf.convergent(1).unwrap()).unwrap();
        let t2 = min_time(&theta, &cf.convergent(2).unwrap()).unwrap();
        let mid = t1
            .interval()
            .add(t2.interval())
            .div(&IntervalScalar::from_u64(2, 256))
            .unwrap();
        let p = predicted_shortest(&cf, &theta, &FlowTime::generic(mid).unwrap()).unwrap();
        assert!(p.convergent.n() == 1 || p.convergent.n() == 2);
    }

    #[test]
    fn below_threshold_is_an_error() {
        let cf = const3();
        let theta = theta3();
        let t = FlowTime::from_f64(1.0, 256);
        assert!(matches!(
            predicted_shortest(&cf, &theta, &t),
            Err(Error::BelowThreshold { .. })
        ));
    }

    #[test]
    fn second_candidates_n1() {
        let cf = const3();
        let got = second_shortest_candidates(&cf, 1).unwrap();
        let want: Vec<LatticeVector> = [(1, 3), (10, 33), (4, 13), (7, 23), (5, 17), (8, 27)]
            .iter()
            .map(|&(q, p)| LatticeVector::from_i64(q, p).unwrap())
            .collect();
        for w in &want {
            assert!(got.contains(w), "missing {w}");
        }
        // every non-convergent candidate obeys the coordinate window
        let (q1, q2) = (Integer::from(4), Integer::from(10));
        for v in &got {
            let is_conv = v == &want[0] || v == &want[1];
            if !is_conv {
                assert!(*v.q() >= q1 && *v.q() < q2, "window violated by {v}");
            }
        }
    }

    #[test]
    fn oracle_shortest_at_t1() {
        let cf = const3();
        let theta = theta3();
        let t1 = min_time(&theta, &cf.convergent(1).unwrap()).unwrap();
        let r = brute_force_k_shortest(&theta, &t1, 500_000, 1).unwrap();
        assert_eq!(r.items[0].0, LatticeVector::from_i64(3, 10).unwrap());
        assert!(r.ties.is_empty());
    }

    #[test]
    fn oracle_tie_at_time_zero() {
        // at t = 0 the flow is a rotation: (1,0) and (0,1) tie at length 1
        let cf = parse_slope("a0=3,const:4").unwrap();
        let theta = cf.theta_enclosure(256, 1e-30).unwrap();
        let t = FlowTime::from_f64(0.0, 256);
        let r = brute_force_k_shortest(&theta, &t, 10_000, 2).unwrap();
        let set: Vec<&LatticeVector> = r.items.iter().map(|(v, _)| v).collect();
        assert!(set.contains(&&LatticeVector::from_i64(1, 0).unwrap()));
        assert!(set.contains(&&LatticeVector::from_i64(0, 1).unwrap()));
        assert!(!r.ties.is_empty(), "unit vectors must be reported as a tie");
        for (_, l) in &r.items {
            assert!(l.contains_f64(1.0));
        }
    }

    #[test]
    fn oracle_window_too_small() {
        let cf = const3();
        let theta = theta3();
        let t8 = min_time(&theta, &cf.convergent(8).unwrap()).unwrap();
        assert!(matches!(
            brute_force_k_shortest(&theta, &t8, 64, 1),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn unimodular_flow_determinant() {
        // det of the flow matrix is exactly 1; the interval evaluation of
        // (theta e^{t/2})(theta e^{-t/2}) + e^{t/2} e^{-t/2}, over 1+theta^2,
        // must enclose 1 within its width.
        let theta = theta3();
        let prec = 256;
        for tv in [0.0, 3.7, 11.25] {
            let t = IntervalScalar::from_f64(tv, prec);
            let e_half = t.div(&IntervalScalar::from_u64(2, prec)).unwrap().exp();
            let em_half = t
                .neg()
                .div(&IntervalScalar::from_u64(2, prec))
                .unwrap()
                .exp();
            let det = theta
                .mul(&e_half)
                .mul(&theta.mul(&em_half))
                .add(&e_half.mul(&em_half))
                .div(&IntervalScalar::one(prec).add(&theta.square()))
                .unwrap();
            assert!(det.contains_f64(1.0));
            assert!(det.width().to_f64() < 1e-40);
        }
    }

    #[test]
    fn graphs_cross_at_most_once() {
        // sign changes of l_t^2(c_2) - l_t^2(c_5) over a fine grid
        let theta = theta3();
        let cf = const3();
        let a = LatticeVector::from(&cf.convergent(2).unwrap());
        let b = LatticeVector::from(&cf.convergent(5).unwrap());
        let mut prev_sign = 0i32;
        let mut changes = 0;
        for i in 0..400 {
            let t = FlowTime::from_f64(i as f64 * 0.05, 256);
            let d = flat_length_sq(&theta, &a, &t)
                .unwrap()
                .sub(&flat_length_sq(&theta, &b, &t).unwrap());
            let s = if d.is_positive() {
                1
            } else if d.is_negative() {
                -1
            } else {
                continue;
            };
            if prev_sign != 0 && s != prev_sign {
                changes += 1;
            }
            prev_sign = s;
        }
        assert!(changes <= 1);
    }
}
