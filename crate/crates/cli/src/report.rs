//! Output emission: the frozen CSV schema, the JSON mirror with full
//! diagnostics, and the plot-data file. All numeric fields are interval
//! triples derived from directed-rounded endpoints; no bare point estimates.

use serde::Serialize;
use std::fmt::Write as _;

use teichflow_core::divergence::{
    limit_weights, oscillation_report, OscillationReport, RatioTracePoint, TraceEntry,
};
use teichflow_core::flow::LatticeVector;
use teichflow_core::lengths::LengthInterval;
use teichflow_core::numerics::IntervalScalar;

pub const CSV_HEADER: &str = "t_lo,t_hi,parity,k,sheet1_q,sheet1_p,sheet2_q,sheet2_p,a1_lo,a1_hi,a2_lo,a2_hi,ratio_lo,ratio_mid,ratio_hi,w1_lo,w1_mid,w1_hi,mod_bound,ct_bound,flags";

/// Largest candidate set mirrored verbatim into the JSON diagnostics.
const CANDIDATE_JSON_CAP: usize = 512;

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn flags_of(p: &RatioTracePoint) -> String {
    p.flags
        .iter()
        .map(|f| f.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// One CSV row per trace entry; failed points keep their slot with empty
/// numeric fields and an `error:` flag.
pub fn trace_csv(entries: &[TraceEntry]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in entries {
        let t_lo = num(e.t.to_f64_lo());
        let t_hi = num(e.t.to_f64_hi());
        let k = e.k.map(|k| k.to_string()).unwrap_or_default();
        match &e.point {
            Ok(p) => {
                let s1 = p.states[0].first_vector();
                let s2 = p.states[1].first_vector();
                let a1 = p.alpha[0].enclosure().expect("validated in trace");
                let a2 = p.alpha[1].enclosure().expect("validated in trace");
                writeln!(
                    out,
                    "{t_lo},{t_hi},{parity},{k},{q1},{p1},{q2},{p2},{a1lo},{a1hi},{a2lo},{a2hi},{rlo},{rmid},{rhi},{wlo},{wmid},{whi},{modb},{ctb},{flags}",
                    parity = p.parity,
                    q1 = s1.q(),
                    p1 = s1.p(),
                    q2 = s2.q(),
                    p2 = s2.p(),
                    a1lo = num(a1.to_f64_lo()),
                    a1hi = num(a1.to_f64_hi()),
                    a2lo = num(a2.to_f64_lo()),
                    a2hi = num(a2.to_f64_hi()),
                    rlo = num(p.ratio.to_f64_lo()),
                    rmid = num(p.ratio.to_f64_mid()),
                    rhi = num(p.ratio.to_f64_hi()),
                    wlo = num(p.w1.to_f64_lo()),
                    wmid = num(p.w1.to_f64_mid()),
                    whi = num(p.w1.to_f64_hi()),
                    modb = opt_num(p.diagnostics.mod_bound.as_ref().map(|m| m.to_f64_hi())),
                    ctb = opt_num(p.diagnostics.ct_bound.as_ref().map(|c| c.to_f64_hi())),
                    flags = flags_of(p),
                )
                .expect("string write");
            }
            Err(err) => {
                writeln!(
                    out,
                    "{t_lo},{t_hi},{parity},{k},,,,,,,,,,,,,,,,,error:{err}",
                    parity = e.parity,
                    err = err.to_string().replace(',', ";"),
                )
                .expect("string write");
            }
        }
    }
    out
}

/// Plot-data file: one whitespace-separated row per successful point.
pub fn trace_plot(entries: &[TraceEntry]) -> String {
    let mut out = String::from("# t_mid ratio_lo ratio_mid ratio_hi w1_lo w1_mid w1_hi parity k\n");
    for e in entries {
        let Ok(p) = &e.point else { continue };
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            num(e.t.to_f64_mid()),
            num(p.ratio.to_f64_lo()),
            num(p.ratio.to_f64_mid()),
            num(p.ratio.to_f64_hi()),
            num(p.w1.to_f64_lo()),
            num(p.w1.to_f64_mid()),
            num(p.w1.to_f64_hi()),
            p.parity,
            e.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
        )
        .expect("string write");
    }
    out
}

#[derive(Serialize)]
struct IntervalDto {
    lo: f64,
    hi: f64,
}

impl From<&IntervalScalar> for IntervalDto {
    fn from(iv: &IntervalScalar) -> Self {
        Self {
            lo: iv.to_f64_lo(),
            hi: iv.to_f64_hi(),
        }
    }
}

#[derive(Serialize)]
struct TripleDto {
    lo: f64,
    mid: f64,
    hi: f64,
}

impl From<&IntervalScalar> for TripleDto {
    fn from(iv: &IntervalScalar) -> Self {
        Self {
            lo: iv.to_f64_lo(),
            mid: iv.to_f64_mid(),
            hi: iv.to_f64_hi(),
        }
    }
}

#[derive(Serialize)]
struct VectorDto {
    q: String,
    p: String,
}

impl From<&LatticeVector> for VectorDto {
    fn from(v: &LatticeVector) -> Self {
        Self {
            q: v.q().to_string(),
            p: v.p().to_string(),
        }
    }
}

#[derive(Serialize)]
struct CurveDto {
    vector: VectorDto,
    flat_sq: IntervalDto,
    ext: IntervalDto,
    hyp: IntervalDto,
    method: String,
}

impl From<&LengthInterval> for CurveDto {
    fn from(li: &LengthInterval) -> Self {
        let vector = match &li.curve {
            teichflow_core::surface::CurveId::SheetCurve { vector, .. } => VectorDto::from(vector),
            _ => VectorDto {
                q: "0".into(),
                p: "0".into(),
            },
        };
        Self {
            vector,
            flat_sq: (&li.flat_sq).into(),
            ext: (&li.ext).into(),
            hyp: (&li.hyp).into(),
            method: li.method.to_string(),
        }
    }
}

#[derive(Serialize)]
struct OracleDto {
    first_match: bool,
    second_in_family: bool,
    oracle_second: VectorDto,
    tie_reported: bool,
}

#[derive(Serialize)]
struct AltSecondDto {
    vector: VectorDto,
    alpha_upper_hi: f64,
}

#[derive(Serialize)]
struct SheetDto {
    first_index: usize,
    first: CurveDto,
    second: CurveDto,
    candidate_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidates: Option<Vec<VectorDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alt_second: Option<AltSecondDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minsky_ok: Option<bool>,
}

#[derive(Serialize)]
struct PointDto {
    t: IntervalDto,
    parity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sheets: Option<Vec<SheetDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha1: Option<IntervalDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha2: Option<IntervalDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<TripleDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w1: Option<TripleDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mod_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ct_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_sandwich: Option<IntervalDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sheet_scale_ratio: Option<f64>,
    flags: Vec<String>,
}

#[derive(Serialize)]
struct WeightDto {
    t_mid: f64,
    parity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    w1_lo: f64,
    w1_mid: f64,
    w1_hi: f64,
    running_min_mid: f64,
    running_max_mid: f64,
}

#[derive(Serialize)]
struct OscillationDto {
    even_mid: Vec<(usize, f64)>,
    odd_mid: Vec<(usize, f64)>,
    even_lo: Vec<(usize, f64)>,
    odd_hi: Vec<(usize, f64)>,
    midpoint_separation_k: Option<usize>,
    interval_separation_k: Option<usize>,
}

impl From<&OscillationReport> for OscillationDto {
    fn from(r: &OscillationReport) -> Self {
        Self {
            even_mid: r.even_mid.clone(),
            odd_mid: r.odd_mid.clone(),
            even_lo: r.even_lo.clone(),
            odd_hi: r.odd_hi.clone(),
            midpoint_separation_k: r.midpoint_separation_k,
            interval_separation_k: r.interval_separation_k,
        }
    }
}

#[derive(Serialize)]
struct TraceDto {
    config: String,
    points: Vec<PointDto>,
    weights: Vec<WeightDto>,
    accumulation: Option<(f64, f64)>,
    oscillation: OscillationDto,
}

/// JSON mirror of the CSV plus full diagnostics (candidate families, oracle
/// comparisons, and the weight/oscillation summaries).
pub fn trace_json(
    config_text: &str,
    entries: &[TraceEntry],
    slopes: [&teichflow_core::ContinuedFraction; 2],
) -> String {
    let mut points = Vec::with_capacity(entries.len());
    for e in entries.iter() {
        let dto = match &e.point {
            Ok(p) => {
                let sheets = p
                    .states
                    .iter()
                    .enumerate()
                    .map(|(si, st)| {
                        let cands = teichflow_core::flow::second_shortest_candidates(
                            slopes[si],
                            st.first_index,
                        )
                        .ok()
                        .filter(|cs| cs.len() <= CANDIDATE_JSON_CAP)
                        .map(|cs| cs.iter().map(VectorDto::from).collect());
                        SheetDto {
                            first_index: st.first_index,
                            first: (&st.first).into(),
                            second: (&st.second).into(),
                            candidate_count: p.diagnostics.second_candidates[si],
                            candidates: cands,
                            oracle: p.diagnostics.oracle[si].as_ref().map(|o| OracleDto {
                                first_match: o.first_match,
                                second_in_family: o.second_in_family,
                                oracle_second: (&o.oracle_second).into(),
                                tie_reported: o.tie_reported,
                            }),
                            alt_second: p.diagnostics.alt_second[si].as_ref().map(|a| {
                                AltSecondDto {
                                    vector: (&a.vector).into(),
                                    alpha_upper_hi: a.alpha_upper_hi,
                                }
                            }),
                            minsky_ok: p.diagnostics.minsky_ok[si],
                        }
                    })
                    .collect();
                PointDto {
                    t: (&e.t).into(),
                    parity: p.parity.to_string(),
                    k: e.k,
                    error: None,
                    sheets: Some(sheets),
                    alpha1: Some((&p.alpha[0].enclosure().expect("validated")).into()),
                    alpha2: Some((&p.alpha[1].enclosure().expect("validated")).into()),
                    ratio: Some((&p.ratio).into()),
                    w1: Some((&p.w1).into()),
                    mod_bound: p.diagnostics.mod_bound.as_ref().map(|m| m.to_f64_hi()),
                    ct_bound: p.diagnostics.ct_bound.as_ref().map(|c| c.to_f64_hi()),
                    gamma_sandwich: p.diagnostics.gamma_sandwich.as_ref().map(IntervalDto::from),
                    sheet_scale_ratio: p.diagnostics.sheet_scale_ratio,
                    flags: p.flags.iter().map(|f| f.to_string()).collect(),
                }
            }
            Err(err) => PointDto {
                t: (&e.t).into(),
                parity: e.parity.to_string(),
                k: e.k,
                error: Some(err.to_string()),
                sheets: None,
                alpha1: None,
                alpha2: None,
                ratio: None,
                w1: None,
                mod_bound: None,
                ct_bound: None,
                gamma_sandwich: None,
                sheet_scale_ratio: None,
                flags: Vec::new(),
            },
        };
        points.push(dto);
    }
    let weights = limit_weights(entries);
    let osc = oscillation_report(entries);
    let dto = TraceDto {
        config: config_text.to_string(),
        points,
        weights: weights
            .points
            .iter()
            .map(|w| WeightDto {
                t_mid: w.t_mid,
                parity: w.parity.to_string(),
                k: w.k,
                w1_lo: w.w1_lo,
                w1_mid: w.w1_mid,
                w1_hi: w.w1_hi,
                running_min_mid: w.running_min_mid,
                running_max_mid: w.running_max_mid,
            })
            .collect(),
        accumulation: weights.accumulation,
        oscillation: (&osc).into(),
    };
    let mut text = serde_json::to_string_pretty(&dto).expect("serializable");
    text.push('\n');
    text
}

/// Summary line for stdout after a trace run.
pub fn trace_summary(entries: &[TraceEntry]) -> String {
    let ok = entries.iter().filter(|e| e.point.is_ok()).count();
    let failed = entries.len() - ok;
    let osc = oscillation_report(entries);
    let mut s = format!(
        "trace: {ok} points computed, {failed} failed; midpoint separation K = {}; certified separation K = {}",
        osc.midpoint_separation_k
            .map(|k| k.to_string())
            .unwrap_or_else(|| "none".into()),
        osc.interval_separation_k
            .map(|k| k.to_string())
            .unwrap_or_else(|| "none".into()),
    );
    if let Some(p) = entries.iter().rev().find_map(|e| e.point.as_ref().ok()) {
        s.push_str(&format!(
            "; last ratio = [{}, {}]",
            num(p.ratio.to_f64_lo()),
            num(p.ratio.to_f64_hi())
        ));
    }
    s
}
