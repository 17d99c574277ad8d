//! Command-line surface: tail experiments, oracle checks, critical-curve
//! solving, random-walk estimators and simplicity frequency.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use critwalk::error::Error as CoreError;
use critwalk::harness::{self, ModelSpec, TailCurve, TailDirection};
use critwalk::oracle::{self, MaterializedInstance};
use critwalk::rng::derive_stream;
use critwalk::walk::{self, IncrementLaw};
use critwalk::{er, intersection, quantum, regular};

#[derive(Parser)]
#[command(name = "critwalk", version, about = "Monte Carlo tails of critical random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials and estimate P(|C_max| < n^{2/3}/A) and/or the upper tail.
    Tail(TailArgs),
    /// Replay explorations against the union-find oracle on random instances.
    OracleCheck(OracleArgs),
    /// Solve the quantum critical curve F(beta, lambda) = 1 for lambda.
    Critical(CriticalArgs),
    /// Random-walk estimators: stay-positive, ballot, Chernoff bound.
    Walk(WalkArgs),
    /// Simplicity frequency of the configuration model vs exp((1-d^2)/4).
    Simplicity(SimplicityArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Serialize, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    Er,
    Regular,
    Intersection,
    Quantum,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Serialize, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
enum Direction {
    Lower,
    Upper,
    Both,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Serialize, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct TailArgs {
    /// JSON config mirroring these flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    p_override: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; CRITWALK_SEED supplies the default.
    #[arg(long, env = "CRITWALK_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated list of A values.
    #[arg(long)]
    a_grid: Option<String>,
    #[arg(long, value_enum)]
    direction: Option<Direction>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Also emit a self-contained plotting script next to the data.
    #[arg(long)]
    plot: bool,
}

/// The tail experiment configuration, JSON-mirrored under the flag names.
#[derive(Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    model: Option<ModelKind>,
    n: Option<usize>,
    lambda: Option<f64>,
    d: Option<usize>,
    beta: Option<f64>,
    gamma: Option<f64>,
    p_override: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
    a_grid: Option<Vec<f64>>,
    direction: Option<Direction>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    plot: Option<bool>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Number of random instances to check.
    #[arg(long)]
    count: u64,
    #[arg(long, env = "CRITWALK_SEED", default_value_t = 0)]
    seed: u64,
    /// Test-only: corrupt one instance to prove the check can fail.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct CriticalArgs {
    #[arg(long)]
    beta: f64,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Debug)]
enum WalkMode {
    StayPositive,
    Ballot,
    Chernoff,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Debug)]
enum LawKind {
    PoissonMinusOne,
    BinomialMinusOne,
    RegularStep,
    CutWalk,
    Rademacher,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long, value_enum)]
    mode: WalkMode,
    #[arg(long, value_enum, default_value = "poisson-minus-one")]
    law: LawKind,
    /// Horizon T (stay-positive) or n (ballot).
    #[arg(long, default_value_t = 256)]
    horizon: u64,
    /// Ballot endpoint j.
    #[arg(long)]
    j: Option<i64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, env = "CRITWALK_SEED", default_value_t = 0)]
    seed: u64,
    /// Binomial count for binomial-minus-one; N for the Chernoff bound.
    #[arg(long)]
    count: Option<u64>,
    /// Step probability for binomial-minus-one / regular-step; P for Chernoff.
    #[arg(long)]
    prob: Option<f64>,
    /// Degree for regular-step / cut-walk.
    #[arg(long)]
    d: Option<u32>,
    /// Deviation x for the Chernoff bound.
    #[arg(long)]
    x: Option<f64>,
}

#[derive(Args)]
struct SimplicityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    trials: u64,
    #[arg(long, env = "CRITWALK_SEED", default_value_t = 0)]
    seed: u64,
}

/// Invalid configuration (exit 2) vs runtime failure (exit 1).
enum CmdError {
    Config(String),
    Runtime(String),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::SizeCap { .. } => {
                CmdError::Config(e.to_string())
            }
            _ => CmdError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tail(args) => cmd_tail(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
        Command::Critical(args) => cmd_critical(args),
        Command::Walk(args) => cmd_walk(args),
        Command::Simplicity(args) => cmd_simplicity(args),
    };
    match result {
        Ok(code) => code,
        Err(CmdError::Config(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_a_grid(text: &str) -> Result<Vec<f64>, CmdError> {
    let grid: Result<Vec<f64>, _> =
        text.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect();
    grid.map_err(|e| CmdError::Config(format!("a-grid: {e}")))
}

fn build_model(cfg: &ExperimentConfig) -> Result<ModelSpec, CmdError> {
    let model = cfg.model.ok_or(CmdError::Config("model is required".into()))?;
    let n = cfg.n.ok_or(CmdError::Config("n is required".into()))?;
    let lambda = cfg.lambda.unwrap_or(0.0);
    Ok(match model {
        ModelKind::Er => ModelSpec::Er(er::ErParams::new(n, lambda, cfg.p_override)?),
        ModelKind::Regular => ModelSpec::Regular(regular::RegParams::new(
            n,
            cfg.d.unwrap_or(3),
            lambda,
            cfg.p_override,
        )?),
        ModelKind::Intersection => ModelSpec::Intersection(
            intersection::IntersectionParams::new(
                n,
                cfg.beta.unwrap_or(1.0),
                cfg.gamma.unwrap_or(1.0),
            )?,
        ),
        ModelKind::Quantum => {
            let beta = cfg.beta.ok_or(CmdError::Config("quantum model needs beta".into()))?;
            let lambda = cfg
                .lambda
                .ok_or(CmdError::Config("quantum model needs lambda > 0".into()))?;
            ModelSpec::Quantum(quantum::QuantumParams::new(n, beta, lambda)?)
        }
    })
}

fn cmd_tail(args: TailArgs) -> Result<ExitCode, CmdError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::Config(format!("config {}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CmdError::Config(format!("config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    // explicit flags override the config file
    if args.model.is_some() {
        cfg.model = args.model;
    }
    if args.n.is_some() {
        cfg.n = args.n;
    }
    if args.lambda.is_some() {
        cfg.lambda = args.lambda;
    }
    if args.d.is_some() {
        cfg.d = args.d;
    }
    if args.beta.is_some() {
        cfg.beta = args.beta;
    }
    if args.gamma.is_some() {
        cfg.gamma = args.gamma;
    }
    if args.p_override.is_some() {
        cfg.p_override = args.p_override;
    }
    if args.trials.is_some() {
        cfg.trials = args.trials;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(text) = &args.a_grid {
        cfg.a_grid = Some(parse_a_grid(text)?);
    }
    if args.direction.is_some() {
        cfg.direction = args.direction;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.format.is_some() {
        cfg.format = args.format;
    }
    if args.plot {
        cfg.plot = Some(true);
    }

    let spec = build_model(&cfg)?;
    let trials = cfg.trials.unwrap_or(1000);
    if trials == 0 {
        return Err(CmdError::Config("trials must be >= 1".into()));
    }
    let seed = cfg.seed.unwrap_or(0);
    let workers = cfg.workers.unwrap_or(1);
    if workers == 0 {
        return Err(CmdError::Config("workers must be >= 1".into()));
    }
    let a_grid = cfg.a_grid.clone().unwrap_or_default();
    if a_grid.is_empty() {
        return Err(CmdError::Config("a-grid must contain at least one positive A".into()));
    }
    if a_grid.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(CmdError::Config("a-grid values must be positive".into()));
    }
    let direction = cfg.direction.unwrap_or(Direction::Lower);
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let format = cfg.format.unwrap_or(OutputFormat::Csv);

    std::fs::create_dir_all(&out_dir)?;
    let summaries = harness::run(&spec, trials, seed, workers)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;

    let n = spec.n();
    let mut curves: Vec<TailCurve> = Vec::new();
    if direction != Direction::Upper {
        curves.push(harness::lower_tail(&summaries, n, &a_grid)?);
    }
    if direction != Direction::Lower {
        curves.push(harness::upper_tail(&summaries, n, &a_grid)?);
    }

    match format {
        OutputFormat::Csv => {
            std::fs::write(
                out_dir.join("summaries.csv"),
                harness::summaries_to_csv(&spec, &summaries),
            )?;
            let refs: Vec<&TailCurve> = curves.iter().collect();
            std::fs::write(out_dir.join("tail.csv"), harness::tails_to_csv(&refs))?;
        }
        OutputFormat::Json => {
            std::fs::write(
                out_dir.join("summaries.json"),
                serde_json::to_string_pretty(&summaries).unwrap(),
            )?;
            std::fs::write(
                out_dir.join("tail.json"),
                serde_json::to_string_pretty(&curves).unwrap(),
            )?;
        }
    }

    #[derive(Serialize)]
    struct FitEntry {
        direction: TailDirection,
        #[serde(skip_serializing_if = "Option::is_none")]
        slope: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        intercept: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        ci_lo: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        ci_hi: Option<f64>,
        rows_used: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    }
    let fits: Vec<FitEntry> = curves
        .iter()
        .map(|curve| match harness::fit_stretch_exponent(curve) {
            Ok(fit) => FitEntry {
                direction: curve.direction,
                slope: Some(fit.slope),
                intercept: Some(fit.intercept),
                ci_lo: Some(fit.ci_lo),
                ci_hi: Some(fit.ci_hi),
                rows_used: fit.rows_used,
                error: None,
            },
            Err(e) => FitEntry {
                direction: curve.direction,
                slope: None,
                intercept: None,
                ci_lo: None,
                ci_hi: None,
                rows_used: 0,
                error: Some(e.to_string()),
            },
        })
        .collect();
    std::fs::write(out_dir.join("fit.json"), serde_json::to_string_pretty(&fits).unwrap())?;

    if cfg.plot.unwrap_or(false) {
        std::fs::write(out_dir.join("plot_tail.py"), PLOT_SCRIPT)?;
    }
    eprintln!(
        "wrote {} trials, {} tail row(s) under {}",
        trials,
        curves.iter().map(|c| c.rows.len()).sum::<usize>(),
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Render log(-log phat) against log A with the fitted line.

Reads tail.csv and fit.json from this script's directory; writes tail.png.
"""
import csv
import json
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "tail.csv"))))
fits = {f["direction"]: f for f in json.load(open(os.path.join(here, "fit.json")))}

fig, ax = plt.subplots()
for direction in sorted({r["direction"] for r in rows}):
    pts = [
        (math.log(float(r["A"])), math.log(-math.log(float(r["phat"]))))
        for r in rows
        if r["direction"] == direction and 0.0 < float(r["phat"]) < 1.0
    ]
    if not pts:
        continue
    xs, ys = zip(*pts)
    ax.scatter(xs, ys, label=f"{direction} tail")
    fit = fits.get(direction, {})
    if fit.get("slope") is not None:
        grid = [min(xs), max(xs)]
        ax.plot(
            grid,
            [fit["slope"] * x + fit["intercept"] for x in grid],
            label=f"{direction}: slope {fit['slope']:.3f}",
        )
ax.set_xlabel("log A")
ax.set_ylabel("log(-log phat)")
ax.legend()
fig.savefig(os.path.join(here, "tail.png"), dpi=150)
print("wrote", os.path.join(here, "tail.png"))
"#;

fn cmd_oracle_check(args: OracleArgs) -> Result<ExitCode, CmdError> {
    if args.count == 0 {
        return Err(CmdError::Config("count must be >= 1".into()));
    }
    let mut stream = derive_stream(args.seed, 0);
    for rep in 0..args.count {
        let fault = args.inject_fault;
        let (replay, truth, dump) = match args.model {
            ModelKind::Er => {
                let n = 2 + stream.index(63);
                let p = [0.02, 0.1, 0.3, 0.8][stream.index(4)];
                let params = er::ErParams::new(n, 0.0, Some(p))?;
                let mut inst = er::materialize(&params, &mut stream)?;
                let replay =
                    er::explore_on_graph(&inst, &er::natural_ordering(n))?.sorted_sizes();
                if fault && !inst.edges.is_empty() {
                    inst.edges.pop();
                }
                let truth = oracle::union_find_components(&MaterializedInstance::SimpleGraph(
                    inst.clone(),
                ))?;
                (replay, truth, serde_json::to_string(&inst).unwrap())
            }
            ModelKind::Regular => {
                let d = [3, 4, 5][stream.index(3)];
                let mut n = 2 + stream.index(63);
                if !(n * d).is_multiple_of(2) {
                    n += 1;
                }
                let pairing = regular::pair_full(n, d, &mut stream)?;
                let mut marks = regular::draw_retention(&pairing, 0.5, &mut stream);
                let ordering: Vec<u32> = (0..n as u32).collect();
                let replay =
                    regular::explore_on_instance(&pairing, &marks, &ordering)?.sorted_sizes();
                if fault {
                    let at = stream.index(marks.len());
                    marks[at] = !marks[at];
                }
                let truth = oracle::union_find_components(&MaterializedInstance::Percolated {
                    pairing: pairing.clone(),
                    retention: marks.clone(),
                })?;
                let dump = serde_json::json!({
                    "pairing": &pairing,
                    "retention": &marks,
                    "simple_flag": regular::is_simple(&pairing),
                });
                (replay, truth, dump.to_string())
            }
            ModelKind::Quantum => {
                let n = 2 + stream.index(23);
                let params = quantum::QuantumParams::new(n, 2.0, 1.2)?;
                let inst = quantum::materialize_quantum(&params, &mut stream)?;
                let mut replay = quantum::full_explore(&inst)?.sorted_sizes();
                if fault {
                    replay[0] += 1;
                }
                let truth =
                    oracle::union_find_components(&MaterializedInstance::Quantum(inst.clone()))?;
                (replay, truth, serde_json::to_string(&inst).unwrap())
            }
            ModelKind::Intersection => {
                // count-based exploration has no pointwise replay; check the
                // two exact component routes on the materialized instance
                let n = 2 + stream.index(63);
                let params = intersection::IntersectionParams::new(n, 1.0, 1.0)?;
                let inst = intersection::materialize(&params, &mut stream)?;
                let mut via_projection = oracle::union_find_components(
                    &MaterializedInstance::Bipartite(inst.clone()),
                )?;
                if fault {
                    via_projection[0] += 1;
                }
                let mut dsu = oracle::DisjointSet::new(n);
                let mut owner = vec![u32::MAX; inst.k];
                for &(v, a) in &inst.links {
                    if owner[a as usize] == u32::MAX {
                        owner[a as usize] = v;
                    } else {
                        dsu.union(owner[a as usize], v);
                    }
                }
                let truth = dsu.component_sizes();
                (via_projection, truth, serde_json::to_string(&inst).unwrap())
            }
        };
        if replay != truth {
            println!("{dump}");
            eprintln!(
                "mismatch at instance {rep}: replay {replay:?} vs union-find {truth:?}"
            );
            return Ok(ExitCode::from(1));
        }
    }
    eprintln!("{} instances checked, all exact", args.count);
    Ok(ExitCode::SUCCESS)
}

fn cmd_critical(args: CriticalArgs) -> Result<ExitCode, CmdError> {
    let point = quantum::solve_critical_lambda(args.beta)?;
    println!("{}", serde_json::to_string_pretty(&point).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn build_law(args: &WalkArgs) -> Result<IncrementLaw, CmdError> {
    Ok(match args.law {
        LawKind::PoissonMinusOne => IncrementLaw::PoissonMinusOne,
        LawKind::BinomialMinusOne => IncrementLaw::BinomialMinusOne {
            count: args.count.ok_or(CmdError::Config("binomial-minus-one needs --count".into()))?,
            prob: args.prob.ok_or(CmdError::Config("binomial-minus-one needs --prob".into()))?,
        },
        LawKind::RegularStep => IncrementLaw::RegularStep {
            d: args.d.ok_or(CmdError::Config("regular-step needs --d".into()))?,
            prob: args.prob.ok_or(CmdError::Config("regular-step needs --prob".into()))?,
        },
        LawKind::CutWalk => IncrementLaw::CutWalk {
            d: args.d.ok_or(CmdError::Config("cut-walk needs --d".into()))?,
        },
        LawKind::Rademacher => IncrementLaw::Rademacher,
    })
}

fn cmd_walk(args: WalkArgs) -> Result<ExitCode, CmdError> {
    match args.mode {
        WalkMode::Chernoff => {
            let n = args.count.ok_or(CmdError::Config("chernoff needs --count".into()))?;
            let p = args.prob.ok_or(CmdError::Config("chernoff needs --prob".into()))?;
            let x = args.x.ok_or(CmdError::Config("chernoff needs --x".into()))?;
            if n < 1 || !(0.0..=1.0).contains(&p) || x < 0.0 {
                return Err(CmdError::Config(
                    "chernoff needs count >= 1, prob in [0,1], x >= 0".into(),
                ));
            }
            println!("N,P,x,bound");
            println!("{},{},{},{}", n, p, x, walk::chernoff_bound(n, p, x));
            Ok(ExitCode::SUCCESS)
        }
        WalkMode::StayPositive => {
            let law = build_law(&args)?;
            let mut stream = derive_stream(args.seed, 0);
            let est =
                walk::stay_positive_estimate(&law, args.horizon, args.trials, &mut stream)?;
            println!("law,params,horizon,j,trials,phat,ci_lo,ci_hi");
            println!(
                "{},,{},,{},{},{},{}",
                law.label(),
                args.horizon,
                est.trials,
                est.phat,
                est.ci_lo,
                est.ci_hi
            );
            Ok(ExitCode::SUCCESS)
        }
        WalkMode::Ballot => {
            let law = build_law(&args)?;
            let j = args.j.ok_or(CmdError::Config("ballot needs --j".into()))?;
            let mut stream = derive_stream(args.seed, 0);
            let est = walk::ballot_estimate(&law, args.horizon, j, args.trials, &mut stream)?;
            println!("law,params,horizon,j,trials,phat,ci_lo,ci_hi");
            println!(
                "{},{},{},{},{},{},{},{}",
                law.label(),
                if est.unreachable { "unreachable" } else { "" },
                args.horizon,
                j,
                est.trials,
                est.phat,
                est.ci_lo,
                est.ci_hi
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_simplicity(args: SimplicityArgs) -> Result<ExitCode, CmdError> {
    if args.trials == 0 {
        return Err(CmdError::Config("trials must be >= 1".into()));
    }
    let (hits, trials) = regular::simple_frequency(args.n, args.d, args.trials, args.seed)?;
    let freq = hits as f64 / trials as f64;
    let (ci_lo, ci_hi) = critwalk::stats::wilson_interval(hits, trials, 1.96);
    let reference = ((1.0 - (args.d * args.d) as f64) / 4.0).exp();
    println!("n,d,trials,simple_frequency,ci_lo,ci_hi,reference");
    println!("{},{},{},{},{},{},{}", args.n, args.d, trials, freq, ci_lo, ci_hi, reference);
    if ci_lo <= reference && reference <= ci_hi {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("frequency {freq} is not consistent with the limit {reference}");
        Ok(ExitCode::from(1))
    }
}
