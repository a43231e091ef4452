mod alphabet;
mod experiment;
mod output;

use alphabet::AlphabetArgs;
use cfdim::indexsets::{
    check_c1, check_c2_gap, check_c3_tail, check_lower_b, check_upper_b, make_full, make_geometric, make_i0, make_i_minus,
    make_i_plus, CheckConfig, RegularityReport, Verdict,
};
use cfdim::measure::{write_paths_csv, ConformalContext};
use cfdim::pressure::{bowen_dimension, classify_regularity, operator_bracket, theta, transfer_lambda, BowenBudget};
use cfdim::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use output::{Emit, Format, Table};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cfdim", version, about = "Dimension, pressure and Diophantine experiments for continued-fraction limit sets")]
struct Cli {
    /// Base seed for all sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for sampling and checks.
    #[arg(long, global = true, env = "CFDIM_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified bracket for the Hausdorff dimension.
    Dim {
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        #[arg(long, default_value_t = 2048)]
        max_cells: usize,
        #[arg(long, default_value_t = 400)]
        max_evals: usize,
    },
    /// Certified λ_t and pressure brackets.
    Pressure {
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[arg(long = "t", value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 1024)]
        cells: usize,
        /// Also report θ and the regularity class.
        #[arg(long)]
        regularity: bool,
    },
    /// Build one of the special alphabets.
    Construct {
        #[arg(value_enum)]
        kind: ConstructKind,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        a: u64,
        /// Elements listed in the output.
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Regularity checkers.
    Check {
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[arg(long)]
        h: f64,
        /// Any of c1,c2,c3,lower-b,upper-b.
        #[arg(long, value_delimiter = ',', default_value = "c1,c2,c3,lower-b,upper-b")]
        criteria: Vec<String>,
        /// c2 scans gaps up to 2^k_max_log2.
        #[arg(long, default_value_t = 40)]
        k_max_log2: u32,
        #[arg(long, default_value_t = 64.0)]
        tolerance: f64,
        #[arg(long, default_value_t = 40)]
        max_exponent: u32,
    },
    /// Digit paths drawn from the conformal measure.
    Sample {
        #[command(flatten)]
        alphabet: AlphabetArgs,
        /// Exponent of the measure; defaults to the dimension.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        h_tol: f64,
        #[arg(long, default_value_t = 100)]
        depth: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Monte-Carlo experiments and series classifiers.
    Experiment(experiment::ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstructKind {
    Full,
    Geometric,
    I0,
    Iplus,
    Iminus,
    R,
    Idelta,
    Liouville,
}

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit status beyond success.
pub enum Status {
    Ok,
    Computation,
    Inconclusive,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidDigit(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers.filter(|&w| w > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let emit = Emit { format: cli.format, output: cli.output.clone() };
    match run(&cli, &emit) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Computation) => ExitCode::from(3),
        Ok(Status::Inconclusive) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli, emit: &Emit) -> Result<Status> {
    match &cli.command {
        Command::Dim { alphabet, tol, max_cells, max_evals } => {
            let set = alphabet.resolve()?.set;
            if !(*tol > 0.0) {
                return Err(Error::Parse("--tol must be positive".into()));
            }
            let r = bowen_dimension(&set, *tol, BowenBudget { max_cells: *max_cells, max_evaluations: *max_evals })?;
            let mid = r.dimension.mid();
            let cross = transfer_lambda(&set, mid, 48, 4096).ok().map(|op| {
                let cert = operator_bracket(&set, mid, *max_cells).ok().map(|b| b.lambda);
                json!({"t": mid, "transfer_eigenvalue": op.eigenvalue, "certified_lambda": cert})
            });
            let config = json!({"alphabet": alphabet.label(), "tol": tol, "max_cells": max_cells, "max_evals": max_evals});
            let result = json!({
                "lo": r.dimension.lo, "hi": r.dimension.hi, "depth_used": r.finest_cells,
                "certified": r.converged, "evaluations": r.evaluations, "cross_check": cross,
            });
            let table = Table::new(["lo", "hi", "depth_used", "certified", "evaluations"])
                .row([r.dimension.lo.to_string(), r.dimension.hi.to_string(), r.finest_cells.to_string(), r.converged.to_string(), r.evaluations.to_string()]);
            emit.write("dim", config, result, table)?;
            Ok(if r.converged { Status::Ok } else { Status::Computation })
        }
        Command::Pressure { alphabet, t, cells, regularity } => {
            let set = alphabet.resolve()?.set;
            let mut rows = Vec::new();
            let mut table = Table::new(["t", "lambda_lo", "lambda_hi", "pressure_lo", "pressure_hi"]);
            for &ti in t {
                let l = operator_bracket(&set, ti, *cells)?.lambda;
                let p = if l.is_finite() { Some(l.ln()) } else { None };
                rows.push(json!({"t": ti, "lambda": l, "pressure": p}));
                let (plo, phi) = p.map(|p| (p.lo, p.hi)).unwrap_or((f64::INFINITY, f64::INFINITY));
                table = table.row([ti.to_string(), l.lo.to_string(), l.hi.to_string(), plo.to_string(), phi.to_string()]);
            }
            let extra = if *regularity {
                json!({"theta": theta(&set).ok(), "regularity": classify_regularity(&set, *cells).to_string()})
            } else {
                serde_json::Value::Null
            };
            let config = json!({"alphabet": alphabet.label(), "t": t, "cells": cells, "regularity": regularity});
            emit.write("pressure", config, json!({"rows": rows, "classification": extra}), table)?;
            Ok(Status::Ok)
        }
        Command::Construct { kind, delta, a, count, stages, n_max } => {
            let mut al = AlphabetArgs { n_max: *n_max, ..Default::default() };
            let (set, c) = match kind {
                ConstructKind::Full => (make_full(), None),
                ConstructKind::Geometric => (make_geometric(*a)?, None),
                ConstructKind::I0 => (make_i0(*delta)?, None),
                ConstructKind::Iplus => (make_i_plus(*delta)?, None),
                ConstructKind::Iminus => (make_i_minus(*delta)?, None),
                ConstructKind::R | ConstructKind::Idelta | ConstructKind::Liouville => {
                    al.family = Some(match kind {
                        ConstructKind::R => format!("r:{delta}"),
                        ConstructKind::Idelta => format!("idelta:{delta}"),
                        _ => format!("liouville:{delta}:{stages}"),
                    });
                    let r = al.resolve().map_err(|e| match e {
                        Error::Parse(m) => Error::Parse(m),
                        other => Error::Construction(other.to_string()),
                    })?;
                    (r.set, r.construction)
                }
            };
            let config = json!({"kind": format!("{kind:?}").to_lowercase(), "delta": delta, "a": a, "count": count, "stages": stages, "budget": al.budget()});
            let mut table = Table::new(["stage", "candidate", "bracket_lo", "bracket_hi", "decision", "depth"]);
            let (audit, details, straddles) = match &c {
                Some(c) => {
                    for r in &c.audit.records {
                        table = table.row([r.stage.clone(), r.candidate.clone(), r.bracket_lo.to_string(), r.bracket_hi.to_string(), r.decision.clone(), r.depth.to_string()]);
                    }
                    (json!(c.audit.records), json!(c.details), json!(c.straddles))
                }
                None => {
                    table = Table::new(["index", "element"]);
                    for (i, d) in set.first_n(*count).iter().enumerate() {
                        table = table.row([i.to_string(), d.to_string()]);
                    }
                    (json!([]), serde_json::Value::Null, json!(0))
                }
            };
            let result = json!({"set": set.to_json(*count), "details": details, "straddles": straddles, "audit": audit});
            emit.write("construct", config, result, table)?;
            Ok(Status::Ok)
        }
        Command::Check { alphabet, h, criteria, k_max_log2, tolerance, max_exponent } => {
            let set = alphabet.resolve()?.set;
            let cfg = CheckConfig { tolerance: *tolerance, max_exponent: *max_exponent, ..Default::default() };
            let k_max = BigUint::from(1u32) << *k_max_log2;
            let mut fragments = Vec::new();
            for c in criteria {
                fragments.push(match c.trim() {
                    "c1" => check_c1(&set, *h, &cfg),
                    "c2" => check_c2_gap(&set, &k_max, &cfg),
                    "c3" => check_c3_tail(&set, *h, &cfg),
                    "lower-b" => check_lower_b(&set, *h, &cfg),
                    "upper-b" => check_upper_b(&set, *h, &cfg),
                    other => return Err(Error::Parse(format!("unknown criterion {other:?}"))),
                });
            }
            let report = RegularityReport { h: *h, fragments };
            let mut table = Table::new(["criterion", "verdict", "range_min", "range_max", "value", "witness"]);
            for f in &report.fragments {
                let (a, b) = f.range.map(|(a, b)| (a.to_string(), b.to_string())).unwrap_or_default();
                table = table.row([
                    f.criterion.to_string(),
                    verdict_name(f.verdict).to_string(),
                    a,
                    b,
                    f.value.map(|v| v.to_string()).unwrap_or_default(),
                    f.witness.clone().unwrap_or_default(),
                ]);
            }
            let inconclusive = report.fragments.iter().any(|f| f.verdict == Verdict::Inconclusive);
            let config = json!({"alphabet": alphabet.label(), "h": h, "criteria": criteria, "k_max_log2": k_max_log2, "check": cfg});
            emit.write("check", config, json!({"overall": verdict_name(report.overall()), "report": report}), table)?;
            Ok(if inconclusive { Status::Inconclusive } else { Status::Ok })
        }
        Command::Sample { alphabet, h, h_tol, depth, samples } => {
            let set = alphabet.resolve()?.set;
            let seed = cli.seed.unwrap_or(1);
            let ctx = match h {
                Some(h) => ConformalContext::new(&set, *h, seed)?,
                None => ConformalContext::at_dimension(&set, *h_tol, seed)?,
            };
            let paths = (0..*samples).map(|r| ctx.sample_point(*depth, r as u64)).collect::<Result<Vec<_>>>()?;
            let config = json!({"alphabet": alphabet.label(), "h": ctx.h, "h_tol": h_tol, "depth": depth, "samples": samples, "seed": seed});
            if emit.format == Format::Csv {
                let mut buf = Vec::new();
                write_paths_csv(&paths, &mut buf).map_err(|e| Error::Domain(e.to_string()))?;
                emit.write_raw(&buf)?;
                return Ok(Status::Ok);
            }
            let p: Vec<_> = paths
                .iter()
                .map(|p| json!({"digits": p.digits.iter().map(|d| d.to_string()).collect::<Vec<_>>(), "log_q": p.log_q, "eta_sums": p.eta_sums, "start": p.start}))
                .collect();
            emit.write("sample", config, json!({"paths": p}), Table::new(["unused"]))?;
            Ok(Status::Ok)
        }
        Command::Experiment(args) => experiment::run(args, cli.seed, emit),
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::PassWithConstants => "pass",
        Verdict::FailWithWitness => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}
