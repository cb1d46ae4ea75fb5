//! The ratio-trace experiment: tagged even/odd time sequences, per-time
//! certified intervals for the hyperbolic length ratio of the two marked
//! curves, the oscillation trace, and the projective limit-weight summary.

use rug::{Integer, Rational};
use std::fmt;

use crate::contfrac::{ContinuedFraction, ElementPattern};
use crate::error::{Error, Result};
use crate::flow::{
    brute_force_k_shortest, flat_length_sq, min_time, predicted_shortest,
    second_shortest_candidates, FlowTime, LatticeVector, TimeTag,
};
use crate::lengths::{
    crossing_arc_bound, curve_length_lower, curve_length_upper, length_interval,
    minsky_intersection_bound, LengthInterval, ShortCurveState,
};
use crate::numerics::{IntervalScalar, Precision};
use crate::surface::{annulus_modulus_bound, CurveId, Sheet, SlitSurfaceConfig};

const REFINE_CAP: u32 = 4;
const CT_DELTA: f64 = 0.1;

/// A divergence (or control) scenario: the glued surface, the spike
/// schedule of the second slope, and run parameters.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: SlitSurfaceConfig,
    spike_positions: Vec<u64>,
    spike_values: Vec<u64>,
    k_max: usize,
    sample_density: usize,
    precision: Precision,
    oracle_window: u64,
}

impl Scenario {
    pub fn new(
        config: SlitSurfaceConfig,
        k_max: usize,
        sample_density: usize,
        precision: Precision,
        oracle_window: u64,
    ) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::InvalidConfig("k_max must be >= 1".into()));
        }
        let (spike_positions, spike_values) = match config.theta2().pattern() {
            ElementPattern::Spiked {
                base,
                positions,
                values: _,
            } => {
                let mut ps = Vec::with_capacity(k_max);
                let mut vs = Vec::with_capacity(k_max);
                for k in 1..=k_max as u64 {
                    let pos = positions.position(k).ok_or_else(|| {
                        Error::InvalidConfig(format!("spike position n_{k} undefined"))
                    })?;
                    ps.push(pos);
                    let v = config.theta2().element(pos)?;
                    vs.push(v);
                }
                let _ = base;
                if vs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidConfig(
                        "spike values must be strictly increasing".into(),
                    ));
                }
                (ps, vs)
            }
            // control shape: keep the even/odd time schedule at n_k = 2k
            _ => ((1..=k_max as u64).map(|k| 2 * k).collect(), Vec::new()),
        };
        // divergent-scenario shape: all elements past a_0 at least 3 on both sheets
        let depth = spike_positions.last().copied().unwrap_or(2) + 2;
        for (name, cf) in [("theta1", config.theta1()), ("theta2", config.theta2())] {
            if cf.min_tail_element(depth.max(30))? < 3 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must have elements >= 3 past a_0"
                )));
            }
        }
        Ok(Self {
            config,
            spike_positions,
            spike_values,
            k_max,
            sample_density,
            precision,
            oracle_window,
        })
    }

    /// The default divergent scenario: constant slope [3; 3, 3, ...] against
    /// a base-3 slope with spikes 4^k at positions 2k, slit 1/2, five spikes.
    pub fn default_divergent(precision: Precision) -> Result<Self> {
        let theta1 = crate::contfrac::parse_slope("a0=3,const:3")?;
        let theta2 = crate::contfrac::parse_slope("a0=3,spiked:base=3,positions=2k,values=4^k")?;
        let config = SlitSurfaceConfig::new(theta1, theta2, Rational::from((1u32, 2u32)))?;
        Scenario::new(config, 5, 2, precision, 1_000_000)
    }

    /// The same scenario with the spikes removed (both slopes bounded).
    pub fn control(&self) -> Result<Self> {
        let theta2 = match self.config.theta2().pattern() {
            ElementPattern::Spiked { base, .. } => {
                ContinuedFraction::new(self.config.theta2().a0(), ElementPattern::Const(*base))?
            }
            _ => self.config.theta2().clone(),
        };
        let config = SlitSurfaceConfig::new(
            self.config.theta1().clone(),
            theta2,
            self.config.s().clone(),
        )?;
        let mut scn = Scenario::new(
            config,
            self.k_max,
            self.sample_density,
            self.precision,
            self.oracle_window,
        )?;
        scn.spike_positions = self.spike_positions.clone();
        Ok(scn)
    }

    pub fn config(&self) -> &SlitSurfaceConfig {
        &self.config
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn sample_density(&self) -> usize {
        self.sample_density
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn oracle_window(&self) -> u64 {
        self.oracle_window
    }

    pub fn is_control(&self) -> bool {
        self.spike_values.is_empty()
    }

    pub fn spike_positions(&self) -> &[u64] {
        &self.spike_positions
    }

    pub fn spike_values(&self) -> &[u64] {
        &self.spike_values
    }

    fn ctx(&self, level: u32) -> Result<Ctx> {
        let prec = self.precision.refined(level);
        let theta1 = self
            .config
            .theta1()
            .theta_enclosure(prec.bits(), prec.target_width())?;
        let theta2 = self
            .config
            .theta2()
            .theta_enclosure(prec.bits(), prec.target_width())?;
        Ok(Ctx {
            theta: [theta1, theta2],
            prec,
        })
    }

    /// `t_{2k}`: the minimizing time of the second slope's convergent
    /// `n_k - 1`.
    pub fn even_time(&self, k: usize) -> Result<FlowTime> {
        self.even_time_ctx(&self.ctx(0)?, k)
    }

    fn even_time_ctx(&self, ctx: &Ctx, k: usize) -> Result<FlowTime> {
        self.check_k(k)?;
        let index = self.spike_positions[k - 1] as usize - 1;
        let c = self.config.theta2().convergent(index)?;
        let t = min_time(&ctx.theta[1], &c)?;
        Ok(t.retagged(TimeTag::EvenSequence { k, index }))
    }

    /// `t_{2k+1} = log((1 + theta2^2) q_{2,n_k}^2)`.
    pub fn odd_time(&self, k: usize) -> Result<FlowTime> {
        self.odd_time_ctx(&self.ctx(0)?, k)
    }

    fn odd_time_ctx(&self, ctx: &Ctx, k: usize) -> Result<FlowTime> {
        self.check_k(k)?;
        let index = self.spike_positions[k - 1] as usize;
        let c = self.config.theta2().convergent(index)?;
        let theta2 = &ctx.theta[1];
        let prec = theta2.prec();
        let qsq = Integer::from(c.q() * c.q());
        let t = IntervalScalar::one(prec)
            .add(&theta2.square())
            .mul_integer(&qsq)
            .ln()?;
        FlowTime::new(t, TimeTag::OddSequence { k, index })
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k < 1 || k > self.k_max {
            return Err(Error::InvalidConfig(format!(
                "k = {k} outside 1..={}",
                self.k_max
            )));
        }
        Ok(())
    }

    /// Certified ratio point at an arbitrary time above both thresholds.
    pub fn ratio_at(&self, t: &FlowTime) -> Result<RatioTracePoint> {
        let mut last = None;
        for level in 0..=REFINE_CAP {
            let ctx = self.ctx(level)?;
            match self.ratio_at_ctx(&ctx, t, Parity::Generic, None) {
                Err(e @ (Error::InsufficientPrecision(_) | Error::AmbiguousAtPrecision(_))) => {
                    last = Some(e);
                }
                other => return other,
            }
        }
        Err(last.unwrap_or_else(|| Error::InsufficientPrecision("refinement cap reached".into())))
    }

    fn ratio_at_ctx(
        &self,
        ctx: &Ctx,
        t: &FlowTime,
        parity: Parity,
        k: Option<usize>,
    ) -> Result<RatioTracePoint> {
        let mut flags = Vec::new();
        let state1 = self.sheet_state(ctx, Sheet::One, t, &mut flags)?;
        let state2 = self.sheet_state(ctx, Sheet::Two, t, &mut flags)?;

        let mut alpha = Vec::with_capacity(2);
        let mut alt_upper = [None, None];
        for (i, st) in [&state1, &state2].iter().enumerate() {
            let target = CurveId::alpha(st.state.sheet);
            let lower = curve_length_lower(&st.state, &target)?;
            let upper = curve_length_upper(&st.state, &target)?;
            if !(lower.lo().to_f64() > 0.0) {
                return Err(Error::InsufficientPrecision(format!(
                    "vacuous lower bound for alpha on sheet {}",
                    st.state.sheet
                )));
            }
            if let Some(alt) = &st.alt_second {
                let mut alt_state = st.state.clone();
                alt_state.second = alt.clone();
                alt_upper[i] = Some(AltEstimate {
                    vector: match &alt.curve {
                        CurveId::SheetCurve { vector, .. } => vector.clone(),
                        _ => unreachable!(),
                    },
                    alpha_upper_hi: curve_length_upper(&alt_state, &target)?.to_f64_hi(),
                });
            }
            alpha.push(CurveBounds { lower, upper });
        }
        let alpha2 = alpha.pop().expect("two sheets");
        let alpha1 = alpha.pop().expect("two sheets");

        let a1 = alpha1.enclosure()?;
        let a2 = alpha2.enclosure()?;
        let ratio = monotone_quotient(&a1, &a2)?;
        let w1 = weight_interval(&a1, &a2)?;

        let diagnostics = self.diagnostics(t, k, &state1, &state2, &a1, &a2, alt_upper, &mut flags);

        Ok(RatioTracePoint {
            t: t.clone(),
            parity,
            k,
            states: [state1.state, state2.state],
            alpha: [alpha1, alpha2],
            ratio,
            w1,
            diagnostics,
            flags,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn diagnostics(
        &self,
        t: &FlowTime,
        k: Option<usize>,
        state1: &SheetComputation,
        state2: &SheetComputation,
        a1: &IntervalScalar,
        a2: &IntervalScalar,
        alt_second: [Option<AltEstimate>; 2],
        flags: &mut Vec<Flag>,
    ) -> Diagnostics {
        let r1 = state1.state.first.flat_sq.sqrt().ok();
        let r2 = state2.state.first.flat_sq.sqrt().ok();
        let mod_bound = match (r1, r2) {
            (Some(r1), Some(r2)) => match annulus_modulus_bound(self.config.s(), t, &r1, &r2) {
                Ok(m) => Some(m),
                Err(_) => {
                    flags.push(Flag::ModBoundUnavailable);
                    None
                }
            },
            _ => {
                flags.push(Flag::ModBoundUnavailable);
                None
            }
        };
        let ct_bound = mod_bound
            .as_ref()
            .and_then(|m| crossing_arc_bound(m, CT_DELTA).ok());
        let gamma_sandwich = ct_bound.as_ref().and_then(|ct| {
            let sum = a1.add(a2);
            let prec = sum.prec();
            let one = IntervalScalar::one(prec);
            // crossing-curve sandwich with unit additive constant:
            // 1 - 1/S <= l(gamma)/S <= 1 + (2 c_t + 1)/S
            let lo = one.sub(&sum.recip().ok()?);
            let hi = one.add(
                &ct.mul(&IntervalScalar::from_u64(2, prec))
                    .add(&one)
                    .div(&sum)
                    .ok()?,
            );
            IntervalScalar::from_endpoints(lo.lo().clone(), hi.hi().clone()).ok()
        });
        let sheet_scale_ratio = match (k, t.tag()) {
            (Some(k), TimeTag::EvenSequence { .. }) if !self.is_control() => {
                let nk = self.spike_positions[k - 1] as usize;
                let a = self.spike_values.get(k - 1).copied().unwrap_or(3) as f64;
                let q2 = self
                    .config
                    .theta2()
                    .convergent(nk - 1)
                    .ok()
                    .map(|c| c.q().to_f64());
                let q1 = state1.state.first_vector().q().to_f64();
                q2.map(|q2| q1 / (q2 * a.sqrt()))
            }
            _ => None,
        };
        let minsky_ok = [state1, state2].map(|st| {
            minsky_intersection_bound(&st.state.first.ext, &st.state.second.ext)
                .ok()
                .map(|b| b.hi().to_f64() >= 1.0)
        });
        Diagnostics {
            mod_bound,
            ct_bound,
            gamma_sandwich,
            sheet_scale_ratio,
            alt_second,
            minsky_ok,
            second_candidates: [state1.candidate_count, state2.candidate_count],
            oracle: [state1.oracle.clone(), state2.oracle.clone()],
        }
    }

    /// Shortest/second-shortest snapshot for one sheet, oracle-checked when
    /// the certified window fits the configured cap.
    fn sheet_state(
        &self,
        ctx: &Ctx,
        sheet: Sheet,
        t: &FlowTime,
        flags: &mut Vec<Flag>,
    ) -> Result<SheetComputation> {
        let cf = self.config.theta(sheet);
        let theta = &ctx.theta[sheet.index()];
        let s = self.config.s();

        let prediction = predicted_shortest(cf, theta, t)?;
        if prediction.tie_with.is_some() {
            flags.push(Flag::FirstTie(sheet));
        }
        let n = prediction.convergent.n();
        let first_v = LatticeVector::from(&prediction.convergent);

        // second-shortest: interval argmin over the classified candidates
        let candidates = second_shortest_candidates(cf, n)?;
        let mut scored: Vec<(LatticeVector, IntervalScalar)> = Vec::with_capacity(candidates.len());
        for v in &candidates {
            if *v == first_v {
                continue;
            }
            scored.push((v.clone(), flat_length_sq(theta, v, t)?));
        }
        scored.sort_by(|a, b| {
            a.1.lo()
                .partial_cmp(b.1.lo())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        let (mut second_v, second_len) = scored.first().cloned().ok_or_else(|| {
            Error::Unsupported(format!("no second-shortest candidate on sheet {sheet}"))
        })?;
        if scored.iter().skip(1).any(|(_, l)| l.overlaps(&second_len)) {
            flags.push(Flag::SecondTie(sheet));
        }

        // oracle cross-check where the certified enumeration fits the cap
        let mut oracle = None;
        let mut alt_second: Option<LengthInterval> = None;
        if self.oracle_feasible(theta, t, &second_v)? {
            match brute_force_k_shortest(theta, t, self.oracle_window, 2) {
                Ok(res) => {
                    let o_first = &res.items[0].0;
                    let o_second = &res.items[1].0;
                    let first_match = *o_first == first_v;
                    let second_in_family = candidates.contains(o_second);
                    if !first_match {
                        flags.push(Flag::OracleFirstMismatch(sheet));
                    }
                    if !second_in_family {
                        flags.push(Flag::SecondOutsideFamily(sheet));
                    }
                    if *o_second != second_v && res.ties.is_empty() {
                        // estimator follows the oracle; the classified pick
                        // is kept as the logged alternative
                        flags.push(Flag::OracleSecondDiffers(sheet));
                        alt_second = Some(length_interval(theta, sheet, &second_v, s, t)?);
                        second_v = o_second.clone();
                    }
                    oracle = Some(OracleCheck {
                        first_match,
                        second_in_family,
                        oracle_second: o_second.clone(),
                        tie_reported: !res.ties.is_empty(),
                    });
                }
                Err(Error::WindowTooSmall { .. }) => flags.push(Flag::OracleSkipped(sheet)),
                Err(e) => return Err(e),
            }
        } else {
            flags.push(Flag::OracleSkipped(sheet));
        }

        let first = length_interval(theta, sheet, &first_v, s, t)?;
        let second = length_interval(theta, sheet, &second_v, s, t)?;
        if second.flat_sq.certainly_lt(&first.flat_sq) {
            return Err(Error::AmbiguousAtPrecision(format!(
                "second-shortest certifiably below the predicted shortest on sheet {sheet}"
            )));
        }
        if first.flat_sq.overlaps(&second.flat_sq) {
            flags.push(Flag::OrderTie(sheet));
        }
        if !first_v.is_primitive() || !second_v.is_primitive() {
            return Err(Error::Domain("short curves must be primitive".into()));
        }

        Ok(SheetComputation {
            state: ShortCurveState {
                sheet,
                t: t.clone(),
                first_index: n,
                first,
                second,
            },
            candidate_count: candidates.len(),
            oracle,
            alt_second,
        })
    }

    /// Cheap feasibility estimate for the certified enumeration: the strip
    /// radius implied by the classified second-shortest length.
    fn oracle_feasible(
        &self,
        theta: &IntervalScalar,
        t: &FlowTime,
        second: &LatticeVector,
    ) -> Result<bool> {
        let prec = theta.prec();
        let l2 = flat_length_sq(theta, second, t)?;
        let one_tsq = IntervalScalar::one(prec).add(&theta.square());
        let m = IntervalScalar::point(l2.hi().clone()).mul(&one_tsq);
        let rm = m.sqrt()?;
        let half = t.interval().div(&IntervalScalar::from_u64(2, prec))?;
        let b1 = rm.mul(&half.exp());
        let b2 = rm.mul(&half.neg().exp());
        let q_need = b1.add(&theta.mul(&b2)).div(&one_tsq)?;
        Ok(q_need.to_f64_hi() * 1.25 + 16.0 <= self.oracle_window as f64)
    }

    /// The tagged time ladder `t_2 < t_3 < ... < t_{2k_max+1}`, certified
    /// strictly increasing.
    pub fn tagged_times(&self) -> Result<Vec<(FlowTime, Parity, usize)>> {
        let ctx = self.ctx(0)?;
        let mut out = Vec::with_capacity(2 * self.k_max);
        for k in 1..=self.k_max {
            out.push((self.even_time_ctx(&ctx, k)?, Parity::Even, k));
            out.push((self.odd_time_ctx(&ctx, k)?, Parity::Odd, k));
        }
        for w in out.windows(2) {
            if !w[0].0.interval().certainly_lt(w[1].0.interval()) {
                return Err(Error::InsufficientPrecision(format!(
                    "tagged times not certifiably increasing between k={} and k={}",
                    w[0].2, w[1].2
                )));
            }
        }
        Ok(out)
    }

    /// The full point schedule: all tagged times plus `sample_density`
    /// generic times per gap, in strictly increasing time order.
    pub fn schedule(&self) -> Result<Vec<(FlowTime, Parity, Option<usize>)>> {
        let tagged = self.tagged_times()?;
        let mut schedule: Vec<(FlowTime, Parity, Option<usize>)> = Vec::new();
        for (i, (t, parity, k)) in tagged.iter().enumerate() {
            schedule.push((t.clone(), *parity, Some(*k)));
            if i + 1 < tagged.len() && self.sample_density > 0 {
                let a = t.interval();
                let b = tagged[i + 1].0.interval();
                let d = self.sample_density as u64;
                for j in 1..=d {
                    let frac = IntervalScalar::from_u64(j, a.prec())
                        .div(&IntervalScalar::from_u64(d + 1, a.prec()))?;
                    let tj = a.add(&b.sub(a).mul(&frac));
                    schedule.push((FlowTime::generic(tj)?, Parity::Generic, None));
                }
            }
        }
        Ok(schedule)
    }

    /// One scheduled point, with the precision retry ladder applied. Points
    /// are independent of each other, so callers may evaluate them
    /// concurrently and merge by schedule order.
    pub fn trace_point(&self, t: &FlowTime, parity: Parity, k: Option<usize>) -> TraceEntry {
        let mut outcome = Err(Error::InsufficientPrecision("not attempted".into()));
        for level in 0..=REFINE_CAP {
            outcome = self
                .ctx(level)
                .and_then(|ctx| self.ratio_at_ctx(&ctx, t, parity, k));
            match &outcome {
                Err(Error::InsufficientPrecision(_)) | Err(Error::AmbiguousAtPrecision(_)) => {
                    continue;
                }
                _ => break,
            }
        }
        TraceEntry {
            t: t.interval().clone(),
            parity,
            k,
            point: outcome,
        }
    }

    /// Full trace in schedule order. Point-level failures are recorded and
    /// the trace continues.
    pub fn trace(&self) -> Result<Vec<TraceEntry>> {
        Ok(self
            .schedule()?
            .into_iter()
            .map(|(t, parity, k)| self.trace_point(&t, parity, k))
            .collect())
    }
}

struct Ctx {
    theta: [IntervalScalar; 2],
    #[allow(dead_code)]
    prec: Precision,
}

struct SheetComputation {
    state: ShortCurveState,
    candidate_count: usize,
    oracle: Option<OracleCheck>,
    alt_second: Option<LengthInterval>,
}

/// Result of the exhaustive cross-check at one trace point.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub first_match: bool,
    pub second_in_family: bool,
    pub oracle_second: LatticeVector,
    pub tie_reported: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Generic,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
            Parity::Generic => write!(f, "generic"),
        }
    }
}

/// Trace flags, serialized into the output files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flag {
    FirstTie(Sheet),
    SecondTie(Sheet),
    OrderTie(Sheet),
    OracleSkipped(Sheet),
    OracleFirstMismatch(Sheet),
    OracleSecondDiffers(Sheet),
    SecondOutsideFamily(Sheet),
    ModBoundUnavailable,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::FirstTie(s) => write!(f, "first_tie_s{s}"),
            Flag::SecondTie(s) => write!(f, "second_tie_s{s}"),
            Flag::OrderTie(s) => write!(f, "order_tie_s{s}"),
            Flag::OracleSkipped(s) => write!(f, "oracle_skipped_s{s}"),
            Flag::OracleFirstMismatch(s) => write!(f, "oracle_first_mismatch_s{s}"),
            Flag::OracleSecondDiffers(s) => write!(f, "oracle_second_differs_s{s}"),
            Flag::SecondOutsideFamily(s) => write!(f, "second_outside_family_s{s}"),
            Flag::ModBoundUnavailable => write!(f, "mod_bound_unavailable"),
        }
    }
}

/// Certified two-sided bound for one marked curve's hyperbolic length.
#[derive(Debug, Clone)]
pub struct CurveBounds {
    pub lower: IntervalScalar,
    pub upper: IntervalScalar,
}

impl CurveBounds {
    /// `[lower.lo, upper.hi]`: the certified enclosure of the length.
    pub fn enclosure(&self) -> Result<IntervalScalar> {
        IntervalScalar::from_endpoints(self.lower.lo().clone(), self.upper.hi().clone())
    }
}

/// Convergent-based alternative estimate logged when the oracle's
/// second-shortest differs from the classified pick.
#[derive(Debug, Clone)]
pub struct AltEstimate {
    pub vector: LatticeVector,
    pub alpha_upper_hi: f64,
}

/// Per-point diagnostics attached to the trace.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub mod_bound: Option<IntervalScalar>,
    pub ct_bound: Option<IntervalScalar>,
    pub gamma_sandwich: Option<IntervalScalar>,
    pub sheet_scale_ratio: Option<f64>,
    pub alt_second: [Option<AltEstimate>; 2],
    pub minsky_ok: [Option<bool>; 2],
    pub second_candidates: [usize; 2],
    pub oracle: [Option<OracleCheck>; 2],
}

/// One certified point of the ratio trace.
#[derive(Debug, Clone)]
pub struct RatioTracePoint {
    pub t: FlowTime,
    pub parity: Parity,
    pub k: Option<usize>,
    pub states: [ShortCurveState; 2],
    pub alpha: [CurveBounds; 2],
    /// `[alpha1.lower/alpha2.upper, alpha1.upper/alpha2.lower]`.
    pub ratio: IntervalScalar,
    /// Normalized weight `l(alpha1) / (l(alpha1) + l(alpha2))`.
    pub w1: IntervalScalar,
    pub diagnostics: Diagnostics,
    pub flags: Vec<Flag>,
}

/// A scheduled trace point and its outcome; failures keep their slot.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub t: IntervalScalar,
    pub parity: Parity,
    pub k: Option<usize>,
    pub point: std::result::Result<RatioTracePoint, Error>,
}

/// `[a.lo/b.hi, a.hi/b.lo]` for positive enclosures.
fn monotone_quotient(a: &IntervalScalar, b: &IntervalScalar) -> Result<IntervalScalar> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::Domain("ratio requires positive enclosures".into()));
    }
    a.div(b)
}

/// `[a.lo/(a.lo+b.hi), a.hi/(a.hi+b.lo)]`, the monotone evaluation of
/// `a/(a+b)` over positive enclosures.
fn weight_interval(a: &IntervalScalar, b: &IntervalScalar) -> Result<IntervalScalar> {
    let lo_a = IntervalScalar::point(a.lo().clone());
    let lo = lo_a.div(&lo_a.add(&IntervalScalar::point(b.hi().clone())))?;
    let hi_a = IntervalScalar::point(a.hi().clone());
    let hi = hi_a.div(&hi_a.add(&IntervalScalar::point(b.lo().clone())))?;
    IntervalScalar::from_endpoints(lo.lo().clone(), hi.hi().clone())
}

/// Per-point projective weight and the running accumulation window.
#[derive(Debug, Clone)]
pub struct WeightPoint {
    pub t_mid: f64,
    pub parity: Parity,
    pub k: Option<usize>,
    pub w1_lo: f64,
    pub w1_mid: f64,
    pub w1_hi: f64,
    pub running_min_mid: f64,
    pub running_max_mid: f64,
    pub gamma_lo: Option<f64>,
    pub gamma_hi: Option<f64>,
}

/// Summary of the projective-weight trace.
#[derive(Debug, Clone)]
pub struct WeightSummary {
    pub points: Vec<WeightPoint>,
    /// Running [min, max] of the weight midpoints: the empirical
    /// accumulation interval of projective weights.
    pub accumulation: Option<(f64, f64)>,
}

pub fn limit_weights(entries: &[TraceEntry]) -> WeightSummary {
    let mut points = Vec::new();
    let mut running_min = f64::INFINITY;
    let mut running_max = f64::NEG_INFINITY;
    for e in entries {
        let Ok(p) = &e.point else { continue };
        let mid = p.w1.to_f64_mid();
        running_min = running_min.min(mid);
        running_max = running_max.max(mid);
        points.push(WeightPoint {
            t_mid: p.t.interval().to_f64_mid(),
            parity: p.parity,
            k: p.k,
            w1_lo: p.w1.to_f64_lo(),
            w1_mid: mid,
            w1_hi: p.w1.to_f64_hi(),
            running_min_mid: running_min,
            running_max_mid: running_max,
            gamma_lo: p.diagnostics.gamma_sandwich.as_ref().map(|g| g.to_f64_lo()),
            gamma_hi: p.diagnostics.gamma_sandwich.as_ref().map(|g| g.to_f64_hi()),
        });
    }
    WeightSummary {
        points,
        accumulation: if running_min.is_finite() {
            Some((running_min, running_max))
        } else {
            None
        },
    }
}

/// Oscillation summary over the tagged points of a trace.
#[derive(Debug, Clone)]
pub struct OscillationReport {
    pub even_mid: Vec<(usize, f64)>,
    pub odd_mid: Vec<(usize, f64)>,
    pub even_lo: Vec<(usize, f64)>,
    pub odd_hi: Vec<(usize, f64)>,
    /// Least K with `min over even k >= K of ratio midpoint` above every odd
    /// ratio midpoint.
    pub midpoint_separation_k: Option<usize>,
    /// Least K with `min over even k >= K of ratio.lo` above every odd
    /// `ratio.hi` (the fully certified separation).
    pub interval_separation_k: Option<usize>,
}

pub fn oscillation_report(entries: &[TraceEntry]) -> OscillationReport {
    let mut even_mid = Vec::new();
    let mut odd_mid = Vec::new();
    let mut even_lo = Vec::new();
    let mut odd_hi = Vec::new();
    for e in entries {
        let (Ok(p), Some(k)) = (&e.point, e.k) else {
            continue;
        };
        match e.parity {
            Parity::Even => {
                even_mid.push((k, p.ratio.to_f64_mid()));
                even_lo.push((k, p.ratio.to_f64_lo()));
            }
            Parity::Odd => {
                odd_mid.push((k, p.ratio.to_f64_mid()));
                odd_hi.push((k, p.ratio.to_f64_hi()));
            }
            Parity::Generic => {}
        }
    }
    let sep = |evens: &[(usize, f64)], odds_cap: f64| -> Option<usize> {
        let ks: Vec<usize> = evens.iter().map(|&(k, _)| k).collect();
        for &start in &ks {
            let min_tail = evens
                .iter()
                .filter(|&&(k, _)| k >= start)
                .map(|&(_, v)| v)
                .fold(f64::INFINITY, f64::min);
            if min_tail > odds_cap {
                return Some(start);
            }
        }
        None
    };
    let odd_mid_cap = odd_mid
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let odd_hi_cap = odd_hi
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let midpoint_separation_k = if odd_mid.is_empty() {
        None
    } else {
        sep(&even_mid, odd_mid_cap)
    };
    let interval_separation_k = if odd_hi.is_empty() {
        None
    } else {
        sep(&even_lo, odd_hi_cap)
    };
    OscillationReport {
        even_mid,
        odd_mid,
        even_lo,
        odd_hi,
        midpoint_separation_k,
        interval_separation_k,
    }
}
