use crate::alphabet::AlphabetArgs;
use crate::output::{Emit, Table};
use crate::Status;
use cfdim::diophantine::{
    classify_klw_series, classify_weiss_series, condensed_series, extremality_experiment, khinchine_experiment, ApproxFn,
    KhinchineConfig,
};
use cfdim::indexsets::FamilyTag;
use cfdim::measure::{decay_probe, geometric_pairs, lyapunov_estimate, lyapunov_series, ConformalContext};
use cfdim::{Error, Result};
use clap::{Args, ValueEnum};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Khinchine,
    Extremality,
    Lyapunov,
    Decay,
    Series,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
pub struct Knobs {
    /// power:C, scaled:EPS, log:ALPHA or table:FILE; a value of "h" means the measure exponent.
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Witnesses are only counted from this index on.
    #[arg(long)]
    pub prefix: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
    /// Exponent of the measure; defaults to the dimension.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub h_tol: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Truncations T = 2^k for the Lyapunov series.
    #[arg(long, value_delimiter = ',')]
    pub series_log2: Option<Vec<u32>>,
    /// Ratio of the geometric alphabet probed for non-decay.
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long)]
    pub n_from: Option<u32>,
    #[arg(long)]
    pub n_to: Option<u32>,
    #[arg(long)]
    pub min_outer: Option<usize>,
    /// Exponent α of the (weiss) series.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_terms: Option<usize>,
}

macro_rules! merge {
    ($a:expr, $b:expr, $($f:ident),*) => { Knobs { $($f: $a.$f.clone().or($b.$f.clone()),)* } };
}

impl Knobs {
    fn merged(&self, p: &Knobs) -> Knobs {
        merge!(self, p, psi, k, depth, samples, prefix, c_grid, h, h_tol, steps, replicas, series_log2, a, n_from, n_to, min_outer, alpha, gamma, n_terms)
    }
}

#[derive(Args, Clone, Debug)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: Option<ExperimentKind>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub preset: Option<PathBuf>,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Default, Deserialize)]
struct Preset {
    kind: Option<ExperimentKind>,
    seed: Option<u64>,
    #[serde(flatten)]
    alphabet: AlphabetArgs,
    #[serde(flatten)]
    knobs: Knobs,
}

fn parse_psi(spec: &str, h: f64) -> Result<ApproxFn> {
    if let Some(path) = spec.strip_prefix("table:") {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
        let mut table = Vec::new();
        for line in text.lines() {
            let body = line.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let v: Vec<f64> = body.split([',', ' ', '\t']).filter(|s| !s.is_empty()).map(|s| s.parse()).collect::<std::result::Result<_, _>>().map_err(|_| Error::Parse(format!("bad ψ table line {body:?}")))?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("bad ψ table line {body:?}")));
            }
            table.push((v[0], v[1]));
        }
        let f = ApproxFn::Custom { table };
        f.validate()?;
        return Ok(f);
    }
    match spec.split_once(':') {
        Some((name, "h")) => ApproxFn::parse(&format!("{name}:{h}")),
        _ => ApproxFn::parse(spec),
    }
}

fn context(set: &cfdim::indexsets::IndexSet, kn: &Knobs, seed: u64) -> Result<ConformalContext> {
    match kn.h {
        Some(h) => ConformalContext::new(set, h, seed),
        None => ConformalContext::at_dimension(set, kn.h_tol.unwrap_or(1e-6), seed),
    }
}

pub fn run(args: &ExperimentArgs, seed: Option<u64>, emit: &Emit) -> Result<Status> {
    let preset: Preset = match &args.preset {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
        }
        None => Preset::default(),
    };
    let kind = args.kind.or(preset.kind).ok_or_else(|| Error::Parse("experiment kind missing".into()))?;
    let seed = seed.or(preset.seed).unwrap_or(1);
    let kn = args.knobs.merged(&preset.knobs);
    let alphabet = args.alphabet.merged(Some(&preset.alphabet));
    let label = alphabet.label();
    let name = format!("experiment:{}", format!("{kind:?}").to_lowercase());

    if kind == ExperimentKind::Series {
        let alpha = kn.alpha.unwrap_or(1.0);
        let psi = parse_psi(kn.psi.as_deref().unwrap_or("log:1"), alpha)?;
        let gamma = kn.gamma.unwrap_or(4.0);
        let n_terms = kn.n_terms.unwrap_or(1000);
        let weiss = classify_weiss_series(&psi, alpha);
        let klw = classify_klw_series(&psi);
        let cond = condensed_series(&psi, alpha, gamma, n_terms)?;
        let mut table = Table::new(["series", "verdict", "index", "partial_sum"]);
        for (nm, r) in [("weiss", &weiss), ("klw", &klw), ("condensed", &cond)] {
            for (q, s) in &r.trace {
                table.push(vec![nm.into(), r.verdict.to_string(), q.to_string(), s.to_string()]);
            }
        }
        let config = json!({"psi": psi, "alpha": alpha, "gamma": gamma, "n_terms": n_terms});
        emit.write(&name, config, json!({"weiss": weiss, "klw": klw, "condensed": cond}), table)?;
        return Ok(Status::Ok);
    }

    let set = alphabet.resolve()?.set;
    let ctx = context(&set, &kn, seed)?;
    let base = json!({"alphabet": label, "seed": seed, "h": ctx.h, "h_bracket": ctx.h_bracket, "h_tol": kn.h_tol.unwrap_or(1e-6), "n_max": alphabet.budget().n_max});
    let with = |extra: serde_json::Value| {
        let mut b = base.clone();
        b.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
        b
    };
    match kind {
        ExperimentKind::Khinchine => {
            let psi = parse_psi(kn.psi.as_deref().unwrap_or("log:h"), ctx.h)?;
            let cfg = KhinchineConfig {
                psi,
                k: kn.k.unwrap_or(1.0),
                depth: kn.depth.unwrap_or(1000),
                n_samples: kn.samples.unwrap_or(100),
                prefix: kn.prefix.unwrap_or(32),
            };
            let r = khinchine_experiment(&ctx, &cfg)?;
            let mut table = Table::new(["n", "survival", "bound", "bound_fitted", "survival_gamma_minus", "survival_gamma_plus"]);
            for n in 0..r.survival.len() {
                table.push(vec![
                    n.to_string(),
                    r.survival[n].to_string(),
                    r.bound[n].to_string(),
                    r.bound_fitted[n].to_string(),
                    r.survival_gamma_minus[n].to_string(),
                    r.survival_gamma_plus[n].to_string(),
                ]);
            }
            emit.write(&name, with(json!({"khinchine": cfg})), json!(r), table)?;
        }
        ExperimentKind::Extremality => {
            let grid = kn.c_grid.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
            let depth = kn.depth.unwrap_or(1000);
            let samples = kn.samples.unwrap_or(100);
            let prefix = kn.prefix.unwrap_or(32);
            let r = extremality_experiment(&ctx, &grid, depth, samples, prefix)?;
            let mut table = Table::new(["c", "witness_fraction", "liouville_fraction"]);
            for (i, c) in grid.iter().enumerate() {
                table.push(vec![c.to_string(), r.witness_fraction[i].to_string(), r.liouville_fraction[i].to_string()]);
            }
            emit.write(&name, with(json!({"c_grid": grid, "depth": depth, "samples": samples, "prefix": prefix})), json!(r), table)?;
        }
        ExperimentKind::Lyapunov => {
            let steps = kn.steps.unwrap_or(100_000);
            let replicas = kn.replicas.unwrap_or(4);
            let ks = kn.series_log2.clone().unwrap_or_default();
            let est = lyapunov_estimate(&ctx, steps, replicas)?;
            let series: Vec<_> = ks.iter().map(|&k| json!({"log2_t": k, "value": lyapunov_series(&set, ctx.h, &(BigUint::from(1u32) << k))})).collect();
            let mut table = Table::new(["replica", "average"]);
            for (i, v) in est.per_replica.iter().enumerate() {
                table.push(vec![i.to_string(), v.to_string()]);
            }
            emit.write(&name, with(json!({"steps": steps, "replicas": replicas, "series_log2": ks})), json!({"estimate": est, "series": series}), table)?;
        }
        ExperimentKind::Decay => {
            let a = kn.a.or(match set.family() {
                FamilyTag::Geometric { a } => Some(*a),
                _ => None,
            });
            let a = a.ok_or_else(|| Error::Parse("decay needs --a or a geometric alphabet".into()))?;
            let (n0, n1) = (kn.n_from.unwrap_or(3), kn.n_to.unwrap_or(8));
            let samples = kn.samples.unwrap_or(200_000);
            let min_outer = kn.min_outer.unwrap_or(30);
            let rows = decay_probe(&ctx, &geometric_pairs(a, n0..=n1), samples, min_outer)?;
            let mut table = Table::new(["center", "radius", "epsilon", "inner", "outer", "ratio", "non_decay"]);
            for r in &rows {
                table.push(vec![
                    r.center.to_string(),
                    r.radius.to_string(),
                    r.epsilon.to_string(),
                    r.inner.to_string(),
                    r.outer.to_string(),
                    r.ratio.map(|v| v.to_string()).unwrap_or_default(),
                    r.non_decay.to_string(),
                ]);
            }
            emit.write(&name, with(json!({"a": a, "n_from": n0, "n_to": n1, "samples": samples, "min_outer": min_outer})), json!({"rows": rows}), table)?;
        }
        ExperimentKind::Series => unreachable!(),
    }
    Ok(Status::Ok)
}
