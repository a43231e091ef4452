//! ψ-approximability on digit sequences, the (weiss)/(KLW) series and the
//! Monte-Carlo experiments behind the extremality and Khinchine theorems.

use crate::contfrac::Digit;
use crate::error::{Error, Result};
use crate::indexsets::IndexSet;
use crate::measure::{log_q_sequence, survival_factor, ConformalContext};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// Slack for log-domain comparisons of `ω_n` against thresholds.
const LN_SLACK: f64 = 1e-12;

/// An approximation function, handled through `φ(q) = 1/(q²ψ(q))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ApproxFn {
    /// `ψ(q) = q^{-(2+c)}`.
    Power { c: f64 },
    /// `ψ(q) = ε q^{-2}`.
    Scaled { eps: f64 },
    /// `ψ(q) = 1/(q² log^{1/α} q)`, with `φ` clamped to 1 where `log q < 1`.
    Log { alpha: f64 },
    /// `(q, ψ(q))` pairs sorted by `q`; `ψ` is constant between entries and
    /// `φ` is held at its last value beyond the table.
    Custom { table: Vec<(f64, f64)> },
}

impl fmt::Display for ApproxFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxFn::Power { c } => write!(f, "power({c})"),
            ApproxFn::Scaled { eps } => write!(f, "scaled({eps})"),
            ApproxFn::Log { alpha } => write!(f, "log({alpha})"),
            ApproxFn::Custom { table } => write!(f, "custom({} entries)", table.len()),
        }
    }
}

impl ApproxFn {
    /// `power:0.5`, `scaled:0.1`, `log:0.7`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, arg) = spec.split_once(':').ok_or_else(|| Error::Parse(format!("expected family:value, got {spec:?}")))?;
        let v: f64 = arg.trim().parse().map_err(|_| Error::Parse(format!("bad number {arg:?}")))?;
        let f = match name.trim() {
            "power" => ApproxFn::Power { c: v },
            "scaled" => ApproxFn::Scaled { eps: v },
            "log" => ApproxFn::Log { alpha: v },
            other => return Err(Error::Parse(format!("unknown ψ family {other:?}"))),
        };
        f.validate()?;
        Ok(f)
    }

    /// `ψ(q) <= q^{-2}` everywhere (i.e. `φ >= 1`) and positivity.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Hypothesis(m));
        match self {
            ApproxFn::Power { c } if !(*c >= 0.0) => bad(format!("power({c}) exceeds q^-2")),
            ApproxFn::Scaled { eps } if !(*eps > 0.0 && *eps <= 1.0) => bad(format!("scaled({eps}) needs 0 < ε <= 1")),
            ApproxFn::Log { alpha } if !(*alpha > 0.0) => bad(format!("log({alpha}) needs α > 0")),
            ApproxFn::Custom { table } => {
                if table.is_empty() {
                    return bad("empty ψ table".into());
                }
                for w in table.windows(2) {
                    if !(w[0].0 < w[1].0) {
                        return bad("ψ table must be sorted by q".into());
                    }
                }
                for &(q, p) in table {
                    if !(q >= 1.0 && p > 0.0 && p * q * q <= 1.0) {
                        return bad(format!("ψ({q}) = {p} violates 0 < ψ(q) <= q^-2"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `q ↦ q²ψ(q)` is nonincreasing.
    pub fn is_monotone(&self) -> bool {
        match self {
            ApproxFn::Custom { table } => table.windows(2).all(|w| w[1].1 * w[1].0 * w[1].0 <= w[0].1 * w[0].0 * w[0].0),
            _ => true,
        }
    }

    /// `ln φ(q)` as a function of `ln q`.
    pub fn ln_phi(&self, ln_q: f64) -> f64 {
        match self {
            ApproxFn::Power { c } => c * ln_q,
            ApproxFn::Scaled { eps } => -eps.ln(),
            ApproxFn::Log { alpha } => {
                if ln_q <= 1.0 {
                    0.0
                } else {
                    ln_q.ln() / alpha
                }
            }
            ApproxFn::Custom { table } => {
                let q = ln_q.exp();
                let k = table.partition_point(|e| e.0 <= q).max(1) - 1;
                let (tq, p) = table[k];
                // φ(q) = 1/(q²ψ(q)) with ψ frozen at the table value
                let q_eff = if k + 1 == table.len() { tq } else { q };
                -(2.0 * q_eff.ln() + p.ln())
            }
        }
    }

    pub fn phi(&self, q: f64) -> f64 {
        self.ln_phi(q.ln()).exp()
    }

    pub fn psi(&self, q: f64) -> f64 {
        (-2.0 * q.ln() - self.ln_phi(q.ln())).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub n: usize,
    pub digit: Digit,
    /// `K φ(q_n)`, or `c Σ_{j<n} η_j` for the η form.
    pub threshold: f64,
    /// `ω_n − K φ(q_n)` (or `η_n − c Σ η_j`).
    pub margin: f64,
    /// `ln ω_n − ln(K φ(q_n))`; equals the margin for the η form.
    pub log_margin: f64,
}

/// Indices `n < depth` with `ω_n >= K φ(q_n)`, `q_n` the denominator of
/// `[0; ω_0, …, ω_{n-1}]`.
pub fn psi_witnesses(digits: &[Digit], psi: &ApproxFn, k: f64, depth: usize) -> Result<Vec<WitnessRecord>> {
    psi.validate()?;
    if !(k > 0.0) {
        return Err(Error::Domain("K must be positive".into()));
    }
    let n = depth.min(digits.len());
    let lq = log_q_sequence(&digits[..n]);
    let ln_k = k.ln();
    let mut out = Vec::new();
    for i in 0..n {
        let ln_qn = if i == 0 { 0.0 } else { lq[i - 1] };
        let ln_thr = ln_k + psi.ln_phi(ln_qn);
        let ln_w = digits[i].ln();
        if ln_w >= ln_thr - LN_SLACK * ln_thr.abs().max(1.0) {
            let thr = ln_thr.exp();
            out.push(WitnessRecord {
                n: i,
                digit: digits[i].clone(),
                threshold: thr,
                margin: (digits[i].to_f64() - thr).max(0.0),
                log_margin: ln_w - ln_thr,
            });
        }
    }
    Ok(out)
}

/// Witnesses of `η_n >= c Σ_{j<n} η_j`.
pub fn eta_witnesses(digits: &[Digit], c: f64, depth: usize, from: usize) -> Vec<WitnessRecord> {
    let n = depth.min(digits.len());
    let mut out = Vec::new();
    let mut sum = 0.0;
    for i in 0..n {
        let eta = digits[i].eta();
        let thr = c * sum;
        if i >= from && eta >= thr {
            out.push(WitnessRecord { n: i, digit: digits[i].clone(), threshold: thr, margin: eta - thr, log_margin: eta - thr });
        }
        sum += eta;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct VwaRow {
    pub c: f64,
    pub count: usize,
    pub last: Option<usize>,
    /// First witnesses (at most 64).
    pub indices: Vec<usize>,
}

/// Per-`c` witness counts of `η_n >= c Σ_{j<n} η_j` for `n < depth`.
pub fn vwa_test(digits: &[Digit], c_grid: &[f64], depth: usize) -> Result<Vec<VwaRow>> {
    if depth < 2 {
        return Err(Error::Domain("depth must be >= 2".into()));
    }
    Ok(c_grid
        .iter()
        .map(|&c| {
            let w = eta_witnesses(digits, c, depth, 0);
            VwaRow { c, count: w.len(), last: w.last().map(|r| r.n), indices: w.iter().take(64).map(|r| r.n).collect() }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct LiouvilleTrace {
    pub horizon: usize,
    /// `η_n / Σ_{j<n} η_j` for `n >= 1`.
    pub ratios: Vec<f64>,
    /// Windowed running maximum `max_{n/2 < j <= n}` of the ratios, so that
    /// it tends to 0 unless large ratios keep recurring.
    pub running_max: Vec<f64>,
    pub max: f64,
    pub exceeds: bool,
}

/// Ratio trace of `η_n / Σ_{j<n} η_j`; Liouville behaviour at the horizon
/// means the running maximum beats `c_max`.
pub fn liouville_test(digits: &[Digit], c_max: f64, depth: usize) -> Result<LiouvilleTrace> {
    if depth < 2 {
        return Err(Error::Domain("depth must be >= 2".into()));
    }
    let n = depth.min(digits.len());
    let mut ratios = Vec::with_capacity(n);
    let mut sum = digits.first().map(|d| d.eta()).unwrap_or(0.0);
    for d in digits.iter().take(n).skip(1) {
        let e = d.eta();
        ratios.push(e / sum);
        sum += e;
    }
    // sliding-window maximum over (n/2, n], window grows so use a deque
    let mut running_max = Vec::with_capacity(ratios.len());
    let mut dq: std::collections::VecDeque<usize> = Default::default();
    for (k, &r) in ratios.iter().enumerate() {
        let idx = k + 1;
        while dq.back().is_some_and(|&b| ratios[b - 1] <= r) {
            dq.pop_back();
        }
        dq.push_back(idx);
        while dq.front().is_some_and(|&f| 2 * f <= idx) {
            dq.pop_front();
        }
        running_max.push(dq.front().map(|&f| ratios[f - 1]).unwrap_or(0.0));
    }
    let max = running_max.iter().cloned().fold(0.0, f64::max);
    Ok(LiouvilleTrace { horizon: n, ratios, running_max, max, exceeds: max > c_max })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    Diverges,
    Converges,
    Undetermined,
}

impl fmt::Display for SeriesVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesVerdict::Diverges => "diverges",
            SeriesVerdict::Converges => "converges",
            SeriesVerdict::Undetermined => "undetermined",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub verdict: SeriesVerdict,
    pub reason: String,
    /// `(index, partial sum)` at decades (or at each term for condensed series).
    pub trace: Vec<(f64, f64)>,
}

const TRACE_MAX: u64 = 10_000_000;

/// Partial sums of `Σ_{q>=1} 1/(q φ(q)^a)` at `q = 10^k`.
fn decade_trace(psi: &ApproxFn, a: f64, q_max: u64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut sum = 0.0;
    let mut next = 10u64;
    for q in 1..=q_max {
        let lq = (q as f64).ln();
        sum += (-lq - a * psi.ln_phi(lq)).exp();
        if q == next || q == q_max {
            out.push((q as f64, sum));
            next = next.saturating_mul(10);
        }
    }
    out
}

fn table_max(psi: &ApproxFn) -> u64 {
    match psi {
        ApproxFn::Custom { table } => (table.last().unwrap().0 as u64).clamp(1, TRACE_MAX),
        _ => TRACE_MAX,
    }
}

/// `Σ q^{2α−1} ψ(q)^α = Σ 1/(q φ(q)^α)`.
pub fn classify_weiss_series(psi: &ApproxFn, alpha: f64) -> SeriesReport {
    let (verdict, reason) = match psi {
        ApproxFn::Power { c } => {
            if c * alpha > 0.0 {
                (SeriesVerdict::Converges, format!("p-series with exponent {}", 1.0 + c * alpha))
            } else {
                (SeriesVerdict::Diverges, "harmonic series".into())
            }
        }
        ApproxFn::Scaled { eps } => (SeriesVerdict::Diverges, format!("{}·Σ 1/q", eps.powf(alpha))),
        ApproxFn::Log { alpha: a0 } => {
            let p = alpha / a0;
            if p <= 1.0 {
                (SeriesVerdict::Diverges, format!("Σ 1/(q log^{p} q) with exponent <= 1"))
            } else {
                (SeriesVerdict::Converges, format!("Σ 1/(q log^{p} q) with exponent > 1"))
            }
        }
        ApproxFn::Custom { .. } => (SeriesVerdict::Undetermined, "tabulated ψ; no closed form beyond the table".into()),
    };
    SeriesReport { verdict, reason, trace: decade_trace(psi, alpha, table_max(psi)) }
}

/// `Σ q ψ(q) = Σ 1/(q φ(q))`.
pub fn classify_klw_series(psi: &ApproxFn) -> SeriesReport {
    classify_weiss_series(psi, 1.0)
}

/// Partial sums of `Σ_{n>=0} φ(γ^n)^{-h}`.
pub fn condensed_series(psi: &ApproxFn, h: f64, gamma: f64, n_max: usize) -> Result<SeriesReport> {
    if !(gamma > 1.0 && h > 0.0) {
        return Err(Error::Domain("need γ > 1 and h > 0".into()));
    }
    let lg = gamma.ln();
    let mut sum = 0.0;
    let mut trace = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        sum += (-h * psi.ln_phi(n as f64 * lg)).exp();
        trace.push((n as f64, sum));
    }
    let (verdict, reason) = match psi {
        ApproxFn::Power { c } => {
            if c * h > 0.0 {
                (SeriesVerdict::Converges, format!("geometric with ratio γ^-{}", c * h))
            } else {
                (SeriesVerdict::Diverges, "constant terms".into())
            }
        }
        ApproxFn::Scaled { .. } => (SeriesVerdict::Diverges, "constant terms".into()),
        ApproxFn::Log { alpha } => {
            let p = h / alpha;
            if p <= 1.0 {
                (SeriesVerdict::Diverges, format!("Σ (n log γ)^-{p}"))
            } else {
                (SeriesVerdict::Converges, format!("Σ (n log γ)^-{p}"))
            }
        }
        ApproxFn::Custom { .. } => (SeriesVerdict::Undetermined, "tabulated ψ".into()),
    };
    Ok(SeriesReport { verdict, reason, trace })
}

#[derive(Clone, Debug, Serialize)]
pub struct KhinchineConfig {
    pub psi: ApproxFn,
    pub k: f64,
    pub depth: usize,
    pub n_samples: usize,
    /// Witnesses `ω_n >= Kφ(q_n)` are counted from this index on.
    pub prefix: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct KhinchineResult {
    pub config: KhinchineConfig,
    pub h: f64,
    pub seed: u64,
    /// Empirical mean of `η`, the `E` in `γ = 1 + ⌈e^E⌉`.
    pub eta_mean: f64,
    pub gamma: f64,
    /// `survival[n]`: share of samples with `ω_j <= K φ(γ^j)` for all `j <= n`.
    pub survival: Vec<f64>,
    pub survival_gamma_minus: Vec<f64>,
    pub survival_gamma_plus: Vec<f64>,
    /// `Π_{m<=n} (1 − 4^{-h} Σ_{i>k_m} i^{-2h})`, `k_m = K φ(γ^m)`.
    pub bound: Vec<f64>,
    /// `Π_{m<=n} (1 − K₂ φ(γ^m)^{-h})` with `K₂` from the measured tail constant.
    pub bound_fitted: Vec<f64>,
    pub k2: f64,
    /// Share of samples with some `n >= prefix` satisfying `ω_n >= K φ(q_n)`.
    pub witness_fraction: f64,
}

/// `min_k k^h Σ_{i>k} i^{-2h}` over `k = 2^j`, `j <= 40`.
fn tail_constant(set: &IndexSet, h: f64) -> f64 {
    (0..=40)
        .map(|j| {
            let k = 1u64 << j;
            set.tail_sum(k, 2.0 * h).lo * (k as f64).powf(h)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `1 − 4^{-h} Σ_{i>k} i^{-2h}` for each `k = e^{t}`, `t` nondecreasing.
/// Below 2^24 the tail is updated by subtracting enumerated elements.
fn survival_factors(set: &IndexSet, h: f64, ln_k: &[f64]) -> Result<Vec<f64>> {
    const ENUM: u64 = 1 << 24;
    let c = 4f64.powf(-h);
    let ks: Vec<Option<u64>> = ln_k.iter().map(|t| if t.exp() < 1.8e19 { Some(t.exp().floor() as u64) } else { None }).collect();
    let small_max = ks.iter().flatten().filter(|&&k| k <= ENUM).max().copied();
    let mut out = Vec::with_capacity(ks.len());
    let mut running: Option<(u64, f64, Vec<u64>, usize)> = None;
    let mut last: Option<(u64, f64)> = None;
    for k in ks {
        let f = match k {
            None => 1.0,
            Some(k) if Some(k) == last.map(|l| l.0) => last.unwrap().1,
            Some(k) if k <= ENUM && small_max.is_some() => {
                let st = match running.take() {
                    Some((k0, t0, elems, pos)) if k >= k0 => {
                        let mut t = t0;
                        let mut p = pos;
                        while p < elems.len() && elems[p] <= k {
                            t -= (elems[p] as f64).powf(-2.0 * h);
                            p += 1;
                        }
                        (k, t, elems, p)
                    }
                    _ => {
                        let t = set.tail_sum(k, 2.0 * h);
                        if !t.is_finite() {
                            return Err(Error::Domain(format!("Σ i^(-{}) diverges", 2.0 * h)));
                        }
                        let elems = set.elements_upto(small_max.unwrap());
                        let p = elems.partition_point(|&e| e <= k);
                        (k, t.lo, elems, p)
                    }
                };
                let f = (1.0 - c * st.1.max(0.0)).clamp(0.0, 1.0);
                running = Some(st);
                f
            }
            Some(k) => survival_factor(set, h, k)?,
        };
        if let Some(k) = k {
            last = Some((k, f));
        }
        out.push(f);
    }
    Ok(out)
}

fn survival_curve(paths: &[Vec<f64>], ln_thresholds: &[f64]) -> Vec<f64> {
    let depth = ln_thresholds.len();
    let mut alive = vec![0usize; depth];
    for ln_w in paths {
        for n in 0..depth {
            let t = ln_thresholds[n];
            if ln_w[n] > t + LN_SLACK * t.abs().max(1.0) {
                break;
            }
            alive[n] += 1;
        }
    }
    alive.iter().map(|&a| a as f64 / paths.len().max(1) as f64).collect()
}

pub fn khinchine_experiment(ctx: &ConformalContext, cfg: &KhinchineConfig) -> Result<KhinchineResult> {
    cfg.psi.validate()?;
    if !cfg.psi.is_monotone() {
        return Err(Error::Hypothesis("q ↦ q²ψ(q) must be nonincreasing".into()));
    }
    if !(cfg.k > 0.0) || cfg.depth == 0 || cfg.n_samples == 0 {
        return Err(Error::Domain("need K > 0, depth >= 1, n_samples >= 1".into()));
    }
    let ln_k = cfg.k.ln();
    let prefix = cfg.prefix;
    let psi = &cfg.psi;
    let runs: Result<Vec<(Vec<f64>, f64, bool)>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|r| {
            let p = ctx.sample_point(cfg.depth, r as u64)?;
            let ln_w: Vec<f64> = p.digits.iter().map(|d| d.ln()).collect();
            let eta_mean = p.eta_sums[cfg.depth - 1] / cfg.depth as f64;
            let wit = (prefix..cfg.depth).any(|n| {
                let thr = ln_k + psi.ln_phi(if n == 0 { 0.0 } else { p.log_q[n - 1] });
                ln_w[n] >= thr - LN_SLACK * thr.abs().max(1.0)
            });
            Ok((ln_w, eta_mean, wit))
        })
        .collect();
    let runs = runs?;
    let eta_mean = runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64;
    let gamma = 1.0 + eta_mean.exp().ceil();
    let paths: Vec<Vec<f64>> = runs.iter().map(|r| r.0.clone()).collect();
    let thresholds = |g: f64| -> Vec<f64> { (0..cfg.depth).map(|n| ln_k + psi.ln_phi(n as f64 * g.ln())).collect() };
    let th = thresholds(gamma);
    let survival = survival_curve(&paths, &th);
    let survival_gamma_minus = survival_curve(&paths, &thresholds((gamma - 1.0).max(1.5)));
    let survival_gamma_plus = survival_curve(&paths, &thresholds(gamma + 1.0));
    let h = ctx.h;
    let factors = survival_factors(&ctx.set, h, &th)?;
    let mut prod = 1.0;
    let bound = factors
        .iter()
        .map(|f| {
            prod *= f;
            prod
        })
        .collect();
    let k2 = 4f64.powf(-h) * tail_constant(&ctx.set, h) * cfg.k.powf(-h);
    let mut prod = 1.0;
    let bound_fitted = (0..cfg.depth)
        .map(|n| {
            let lp = psi.ln_phi(n as f64 * gamma.ln());
            prod *= (1.0 - k2 * (-h * lp).exp()).max(0.0);
            prod
        })
        .collect();
    let witness_fraction = runs.iter().filter(|r| r.2).count() as f64 / runs.len() as f64;
    Ok(KhinchineResult {
        config: cfg.clone(),
        h,
        seed: ctx.seed,
        eta_mean,
        gamma,
        survival,
        survival_gamma_minus,
        survival_gamma_plus,
        bound,
        bound_fitted,
        k2,
        witness_fraction,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalityResult {
    pub h: f64,
    pub seed: u64,
    pub depth: usize,
    pub n_samples: usize,
    pub prefix: usize,
    pub c_grid: Vec<f64>,
    /// Share of samples with a witness `η_n >= c Σ_{j<n} η_j`, `n >= prefix`.
    pub witness_fraction: Vec<f64>,
    /// Share of samples whose Liouville running maximum exceeds `c`.
    pub liouville_fraction: Vec<f64>,
    /// Median over samples of the Liouville running maximum.
    pub liouville_median: f64,
}

pub fn extremality_experiment(ctx: &ConformalContext, c_grid: &[f64], depth: usize, n_samples: usize, prefix: usize) -> Result<ExtremalityResult> {
    if depth < 2 || n_samples == 0 {
        return Err(Error::Domain("need depth >= 2 and n_samples >= 1".into()));
    }
    let runs: Result<Vec<(Vec<bool>, f64)>> = (0..n_samples)
        .into_par_iter()
        .map(|r| {
            let p = ctx.sample_point(depth, r as u64)?;
            let wit = c_grid.iter().map(|&c| !eta_witnesses(&p.digits, c, depth, prefix).is_empty()).collect();
            let lt = liouville_test(&p.digits, 0.0, depth)?;
            Ok((wit, lt.max))
        })
        .collect();
    let runs = runs?;
    let n = runs.len() as f64;
    let witness_fraction = (0..c_grid.len()).map(|k| runs.iter().filter(|r| r.0[k]).count() as f64 / n).collect();
    let liouville_fraction = c_grid.iter().map(|&c| runs.iter().filter(|r| r.1 > c).count() as f64 / n).collect();
    let mut maxes: Vec<f64> = runs.iter().map(|r| r.1).collect();
    maxes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ExtremalityResult {
        h: ctx.h,
        seed: ctx.seed,
        depth,
        n_samples,
        prefix,
        c_grid: c_grid.to_vec(),
        witness_fraction,
        liouville_fraction,
        liouville_median: maxes[maxes.len() / 2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn ones(n: usize) -> Vec<Digit> {
        vec![Digit::Small(1); n]
    }

    #[test]
    fn psi_witness_examples() {
        let sq = ApproxFn::Power { c: 0.0 };
        assert!(psi_witnesses(&ones(20), &sq, 2.0, 20).unwrap().is_empty());
        assert_eq!(psi_witnesses(&ones(20), &sq, 1.0, 20).unwrap().len(), 20);
        // ω_5 = q_5 with the first five digits 1,2,1,3,1
        let mut d: Vec<Digit> = [1u64, 2, 1, 3, 1].iter().map(|&v| Digit::Small(v)).collect();
        let w = crate::contfrac::DigitWord::from_digits([1u64, 2, 1, 3, 1]).unwrap();
        let q5 = w.q_cur().clone();
        d.push(Digit::from_big(q5));
        d.push(Digit::Small(1));
        let wit = psi_witnesses(&d, &ApproxFn::Power { c: 1.0 }, 1.0, 7).unwrap();
        assert!(wit.iter().any(|r| r.n == 5));
        assert!(wit.iter().all(|r| r.n != 6));
        assert!(psi_witnesses(&d, &ApproxFn::Scaled { eps: 2.0 }, 1.0, 7).is_err());
    }

    #[test]
    fn vwa_examples() {
        let r = vwa_test(&ones(30), &[1.0], 30).unwrap();
        assert_eq!(r[0].indices, vec![0, 1]);
        let d: Vec<Digit> = (0..8u32).map(|n| Digit::from_big(BigUint::from(2u32).pow(1 << n))).collect();
        let r = vwa_test(&d, &[0.5], 8).unwrap();
        assert_eq!(r[0].count, 8);
    }

    #[test]
    fn liouville_examples() {
        let t = liouville_test(&ones(1000), 1.0, 1000).unwrap();
        assert!(*t.running_max.last().unwrap() < 0.01);
        let bounded: Vec<Digit> = (0..2000u64).map(|k| Digit::Small(1 + k % 5)).collect();
        let t = liouville_test(&bounded, 1.0, 2000).unwrap();
        assert!(*t.running_max.last().unwrap() < 0.01);
    }

    #[test]
    fn series_table() {
        let lg = ApproxFn::Log { alpha: 0.7 };
        assert_eq!(classify_weiss_series(&lg, 0.7).verdict, SeriesVerdict::Diverges);
        assert_eq!(classify_klw_series(&lg).verdict, SeriesVerdict::Converges);
        assert_eq!(classify_weiss_series(&ApproxFn::Power { c: 0.5 }, 0.3).verdict, SeriesVerdict::Converges);
        assert_eq!(classify_weiss_series(&ApproxFn::Scaled { eps: 0.1 }, 1.0).verdict, SeriesVerdict::Diverges);
        assert_eq!(classify_klw_series(&ApproxFn::Scaled { eps: 0.1 }).verdict, SeriesVerdict::Diverges);
        assert_eq!(classify_klw_series(&ApproxFn::Power { c: 0.5 }).verdict, SeriesVerdict::Converges);
        for f in [lg, ApproxFn::Power { c: 0.5 }, ApproxFn::Scaled { eps: 0.1 }] {
            let a = classify_weiss_series(&f, 0.7).verdict;
            let b = condensed_series(&f, 0.7, 3.0, 100).unwrap().verdict;
            assert_eq!(a, b, "{f}");
        }
    }

    #[test]
    fn incremental_survival_factors() {
        let set = crate::indexsets::make_i0(0.5).unwrap();
        let ln_k: Vec<f64> = [3.0f64, 3.0, 17.0, 100.0, 5000.0, 1e8, 1e30].iter().map(|v| v.ln()).collect();
        let f = survival_factors(&set, 0.5, &ln_k).unwrap();
        for (t, v) in ln_k.iter().zip(&f) {
            let k = t.exp();
            let want = if k > 1e19 { 1.0 } else { survival_factor(&set, 0.5, k.floor() as u64).unwrap() };
            assert!((v - want).abs() < 1e-9, "{k}: {v} vs {want}");
        }
    }

    #[test]
    fn weiss_trace_partial_sums() {
        let r = classify_weiss_series(&ApproxFn::Scaled { eps: 1.0 }, 1.0);
        let (q, s) = r.trace[0];
        assert_eq!(q, 10.0);
        let h10: f64 = (1..=10).map(|q| 1.0 / q as f64).sum();
        assert!((s - h10).abs() < 1e-12);
    }
}
