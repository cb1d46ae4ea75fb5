//! Batch front end: convergent tables, shortest-curve classification against
//! the exhaustive oracle, ratio-trace runs with CSV/JSON/plot emission, and
//! the verification suite.

mod config;
mod report;
mod verify;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

use teichflow_core::contfrac::parse_slope;
use teichflow_core::error::Error;
use teichflow_core::flow::{
    brute_force_k_shortest, classification_threshold, min_time, predicted_shortest,
    second_shortest_candidates, FlowTime, LatticeVector, TimeTag,
};
use teichflow_core::lengths::{ext_enclosure, hyp_from_ext};
use teichflow_core::numerics::Precision;

use config::{OutFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "teichflow",
    version,
    about = "Certified interval computations for the geodesic flow on a two-sheet slit-torus surface"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the convergent table of a slope with approximation-gap brackets
    Convergents(ConvergentsArgs),
    /// Classify the shortest and second-shortest curves over a time grid,
    /// cross-checked against the exhaustive oracle
    Shortest(ShortestArgs),
    /// Run a scenario and write trace.csv, trace.json and plot.dat
    Trace(TraceArgs),
    /// Run the verification suite and print a machine-readable report
    Verify(VerifyArgs),
}

#[derive(Args)]
struct PrecisionArgs {
    /// Working mantissa bits
    #[arg(long, env = "TEICHFLOW_BITS", default_value_t = Precision::DEFAULT_BITS)]
    bits: u32,
    /// Slope-enclosure width goal
    #[arg(long, default_value_t = Precision::DEFAULT_TARGET_WIDTH)]
    target_width: f64,
}

#[derive(Args)]
struct ConvergentsArgs {
    /// Slope spec, e.g. "a0=3,const:3" or "a0=3,spiked:base=3,positions=2k,values=4^k"
    #[arg(long)]
    theta: String,
    /// Largest convergent index
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Table format on stdout
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args)]
struct ShortestArgs {
    /// Slope spec
    #[arg(long)]
    theta: String,
    /// Slit length as "num/den" (used for the length enclosures)
    #[arg(long, default_value = "1/2")]
    s: String,
    /// Grid start (defaults to just above the classification threshold)
    #[arg(long)]
    t_min: Option<f64>,
    /// Grid end
    #[arg(long)]
    t_max: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Exhaustive-search strip cap
    #[arg(long, default_value_t = 1_000_000)]
    oracle_cap: u64,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args)]
struct ScenarioArgs {
    /// First-sheet slope spec
    #[arg(long)]
    theta1: Option<String>,
    /// Second-sheet slope spec (the spiked one in the divergent scenario)
    #[arg(long)]
    theta2: Option<String>,
    /// Slit length as "num/den"
    #[arg(long)]
    s: Option<String>,
    /// Number of even/odd time pairs
    #[arg(long)]
    kmax: Option<usize>,
    /// Generic sample times per gap between tagged times
    #[arg(long)]
    samples: Option<usize>,
    /// Exhaustive-search strip cap per trace point
    #[arg(long)]
    oracle_cap: Option<u64>,
    /// Drop the spikes (bounded control scenario)
    #[arg(long)]
    control: bool,
    /// Worker threads for trace points (0 = number of processors)
    #[arg(long)]
    jobs: Option<usize>,
    /// Flat key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    precision: PrecisionArgs,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory (trace.csv, trace.json, plot.dat, run.config)
    #[arg(long)]
    out: PathBuf,
    /// Stdout summary format
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Sampled times per slope in the oracle group
    #[arg(long, default_value_t = 40)]
    oracle_samples: usize,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Convergents(args) => cmd_convergents(args),
        Cmd::Shortest(args) => cmd_shortest(args),
        Cmd::Trace(args) => cmd_trace(args),
        Cmd::Verify(args) => cmd_verify(args),
    }
}

fn build_config(args: &ScenarioArgs) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {path:?}: {e}")))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &args.theta1 {
        cfg.set("theta1", v)?;
    }
    if let Some(v) = &args.theta2 {
        cfg.set("theta2", v)?;
    }
    if let Some(v) = &args.s {
        cfg.set("s", v)?;
    }
    if let Some(v) = args.kmax {
        cfg.kmax = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.oracle_cap {
        cfg.oracle_cap = v;
    }
    if args.control {
        cfg.control = true;
    }
    if let Some(v) = args.jobs {
        cfg.jobs = v;
    }
    cfg.bits = args.precision.bits;
    cfg.target_width = args.precision.target_width;
    cfg.precision()?; // validate
    Ok(cfg)
}

fn cmd_convergents(args: ConvergentsArgs) -> Result<ExitCode, Error> {
    Precision::new(args.precision.bits, args.precision.target_width)?;
    let cf = parse_slope(&args.theta)?;
    let cs = cf.convergents(args.n + 1)?;
    // gaps at depth need a slope enclosure sharp relative to q_n^2
    let theta = cf.theta_enclosure(
        args.precision.bits.max(4 * (args.n as u32 + 2) + 192),
        args.precision.target_width,
    )?;
    let mut rows = Vec::new();
    for n in 0..=args.n {
        let gap = cf.approximation_gap(n, &theta)?;
        let bracket = cf.gap_bracket(n, theta.prec())?;
        rows.push(serde_json::json!({
            "n": n,
            "p": cs[n].p().to_string(),
            "q": cs[n].q().to_string(),
            "gap_lo": gap.to_f64_lo(),
            "gap_hi": gap.to_f64_hi(),
            "bracket_lo": bracket.to_f64_lo(),
            "bracket_hi": bracket.to_f64_hi(),
        }));
    }
    match args.format {
        OutFormat::Csv => {
            println!("n,p,q,gap_lo,gap_hi,bracket_lo,bracket_hi");
            for r in rows {
                println!(
                    "{},{},{},{},{},{},{}",
                    r["n"],
                    r["p"].as_str().unwrap(),
                    r["q"].as_str().unwrap(),
                    r["gap_lo"],
                    r["gap_hi"],
                    r["bracket_lo"],
                    r["bracket_hi"]
                );
            }
        }
        OutFormat::Json => println!("{}", serde_json::Value::Array(rows)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_shortest(args: ShortestArgs) -> Result<ExitCode, Error> {
    Precision::new(args.precision.bits, args.precision.target_width)?;
    let cf = parse_slope(&args.theta)?;
    let s: rug::Rational = args
        .s
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad slit length {:?}", args.s)))?;
    let theta = cf.theta_enclosure(args.precision.bits, args.precision.target_width)?;
    let thr = classification_threshold(&theta, cf.a0())?;
    let t_min = args.t_min.unwrap_or_else(|| thr.to_f64_hi() + 1e-6);
    if args.t_max <= t_min {
        return Err(Error::InvalidConfig(format!(
            "t_max {} must exceed t_min {t_min}",
            args.t_max
        )));
    }
    // uniform grid plus the exact minimizing times inside the range, the
    // latter carrying their provenance tag
    let mut times: Vec<FlowTime> = (0..args.steps)
        .map(|i| {
            let t = t_min + (args.t_max - t_min) * i as f64 / (args.steps.max(2) - 1) as f64;
            FlowTime::from_f64(t, args.precision.bits)
        })
        .collect();
    for n in 0.. {
        let tn = min_time(&theta, &cf.convergent(n)?)?;
        if tn.interval().to_f64_lo() > args.t_max {
            break;
        }
        if tn.interval().to_f64_hi() >= t_min {
            times.push(tn);
        }
    }
    times.sort_by(|a, b| {
        a.interval()
            .to_f64_mid()
            .partial_cmp(&b.interval().to_f64_mid())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut rows = Vec::new();
    for ft in times {
        let t = ft.interval().to_f64_mid();
        let mut row = serde_json::json!({ "t": t });
        match predicted_shortest(&cf, &theta, &ft) {
            Err(Error::BelowThreshold { .. }) => {
                row["flag"] = "below_threshold".into();
            }
            Err(e) => return Err(e),
            Ok(pred) => {
                let v = LatticeVector::from(&pred.convergent);
                row["predicted_q"] = v.q().to_string().into();
                row["predicted_p"] = v.p().to_string().into();
                row["index"] = pred.convergent.n().into();
                if pred.tie_with.is_some() {
                    row["flag"] = "tie".into();
                }
                if matches!(ft.tag(), TimeTag::MinTime { .. }) {
                    row["provenance"] = "min_time".into();
                }
                let ext = ext_enclosure(&theta, &v, &s, &ft)?;
                let hyp = hyp_from_ext(&ext)?;
                row["ext_lo"] = ext.to_f64_lo().into();
                row["ext_hi"] = ext.to_f64_hi().into();
                row["hyp_lo"] = hyp.to_f64_lo().into();
                row["hyp_hi"] = hyp.to_f64_hi().into();
                match brute_force_k_shortest(&theta, &ft, args.oracle_cap, 2) {
                    Ok(oracle) => {
                        row["oracle_q"] = oracle.items[0].0.q().to_string().into();
                        row["oracle_p"] = oracle.items[0].0.p().to_string().into();
                        row["oracle_match"] = (oracle.items[0].0 == v).into();
                        let fam = second_shortest_candidates(&cf, pred.convergent.n())?;
                        row["second_q"] = oracle.items[1].0.q().to_string().into();
                        row["second_p"] = oracle.items[1].0.p().to_string().into();
                        row["second_in_family"] = fam.contains(&oracle.items[1].0).into();
                        if !oracle.ties.is_empty() {
                            row["flag"] = "tie".into();
                        }
                    }
                    Err(Error::WindowTooSmall { .. }) => {
                        row["oracle_match"] = serde_json::Value::Null;
                        row["flag"] = "oracle_skipped".into();
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        rows.push(row);
    }
    match args.format {
        OutFormat::Csv => {
            println!("t,provenance,index,predicted_q,predicted_p,oracle_q,oracle_p,oracle_match,second_q,second_p,second_in_family,ext_lo,ext_hi,hyp_lo,hyp_hi,flag");
            for r in rows {
                let g = |k: &str| -> String {
                    match &r[k] {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::String(s) => s.clone(),
                        v => v.to_string(),
                    }
                };
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    g("t"),
                    g("provenance"),
                    g("index"),
                    g("predicted_q"),
                    g("predicted_p"),
                    g("oracle_q"),
                    g("oracle_p"),
                    g("oracle_match"),
                    g("second_q"),
                    g("second_p"),
                    g("second_in_family"),
                    g("ext_lo"),
                    g("ext_hi"),
                    g("hyp_lo"),
                    g("hyp_hi"),
                    g("flag")
                );
            }
        }
        OutFormat::Json => println!("{}", serde_json::Value::Array(rows)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace(args: TraceArgs) -> Result<ExitCode, Error> {
    let cfg = build_config(&args.scenario)?;
    let scn = cfg.scenario()?;
    let schedule = scn.schedule()?;

    let entries: Vec<_> = if cfg.jobs == 1 {
        schedule
            .into_iter()
            .map(|(t, parity, k)| scn.trace_point(&t, parity, k))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
        pool.install(|| {
            schedule
                .into_par_iter()
                .map(|(t, parity, k)| scn.trace_point(&t, parity, k))
                .collect()
        })
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::InvalidConfig(format!("cannot create {:?}: {e}", args.out)))?;
    let config_text = cfg.serialize();
    let write = |name: &str, text: String| -> Result<(), Error> {
        std::fs::write(args.out.join(name), text)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {name}: {e}")))
    };
    write("run.config", config_text.clone())?;
    write("trace.csv", report::trace_csv(&entries))?;
    let scn_theta1 = scn.config().theta1();
    let scn_theta2 = scn.config().theta2();
    write(
        "trace.json",
        report::trace_json(&config_text, &entries, [scn_theta1, scn_theta2]),
    )?;
    write("plot.dat", report::trace_plot(&entries))?;
    match args.format.unwrap_or(cfg.format) {
        OutFormat::Json => {
            let osc = teichflow_core::divergence::oscillation_report(&entries);
            println!(
                "{}",
                serde_json::json!({
                    "points": entries.len(),
                    "failed": entries.iter().filter(|e| e.point.is_err()).count(),
                    "midpoint_separation_k": osc.midpoint_separation_k,
                    "interval_separation_k": osc.interval_separation_k,
                    "out": args.out,
                })
            );
        }
        OutFormat::Csv => println!("{}", report::trace_summary(&entries)),
    }

    let failed = entries.iter().filter(|e| e.point.is_err()).count();
    if failed > 0 {
        for e in &entries {
            if let Err(err) = &e.point {
                eprintln!(
                    "point t=[{}, {}] failed: {err}",
                    e.t.to_f64_lo(),
                    e.t.to_f64_hi()
                );
            }
        }
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let cfg = build_config(&args.scenario)?;
    let results = verify::run_all(&cfg, args.oracle_samples);
    println!(
        "{}",
        serde_json::to_string_pretty(&results).expect("serializable")
    );
    if results.iter().any(|r| r.status == verify::Status::Fail) {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}
