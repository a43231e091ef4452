//! Conformal measure `m_I`, the invariant Gibbs measure `μ_I` through a
//! Markov sampler, Lyapunov exponents and decay diagnostics.

use crate::bracket::{Bracket, DirectedSum};
use crate::contfrac::{ln_big_bracket, Digit, DigitWord};
use crate::error::{Error, Result};
use crate::indexsets::rules::{int_bracket, pow_neg};
use crate::indexsets::{BulkPart, IndexSet};
use crate::pressure::{bowen_dimension, transfer_lambda, BowenBudget};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Points of the eigenfunction table on `[0, 1]`.
const TABLE: usize = 1 << 14;
/// Digits up to this bound are proposed from an explicit table.
const EXPLICIT: u64 = 1 << 12;
pub const BURN_IN: usize = 1000;

#[derive(Clone, Debug)]
pub struct ConformalContext {
    pub set: IndexSet,
    pub h: f64,
    /// Dimension bracket `h` was taken from, if any.
    pub h_bracket: Option<Bracket>,
    pub seed: u64,
    /// Explicit proposal cutoff; digits above it come from the tail oracles.
    pub truncation: u64,
    pub eigenvalue: f64,
    table: Vec<f64>,
    table_max: f64,
    explicit: Vec<u64>,
    cumulative: Vec<f64>,
    bulk: Vec<BulkPart>,
    bulk_cumulative: Vec<f64>,
    total: f64,
}

impl ConformalContext {
    pub fn new(set: &IndexSet, h: f64, seed: u64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("h must be positive, got {h}")));
        }
        let s = 2.0 * h;
        if !set.power_sum(s).is_finite() {
            return Err(Error::Domain(format!("h = {h} is not above θ: Σ i^(-{s}) diverges")));
        }
        let grid = transfer_lambda(set, h, 48, EXPLICIT)?;
        let table: Vec<f64> = (0..=TABLE).map(|k| grid.eval(k as f64 / TABLE as f64)).collect();
        let table_min = table.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(table_min > 0.0) {
            return Err(Error::Convergence("eigenfunction is not positive".into()));
        }
        let table_max = table.iter().cloned().fold(0.0, f64::max) * (1.0 + 1e-6);
        let split = set.split(EXPLICIT);
        let mut cumulative = Vec::with_capacity(split.explicit.len());
        let mut acc = 0.0;
        for &i in &split.explicit {
            acc += (i as f64).powf(-s);
            cumulative.push(acc);
        }
        let mut bulk_cumulative = Vec::new();
        for p in &split.bulk {
            acc += p.power_sum(s, 0.0, 0.0).mid();
            bulk_cumulative.push(acc);
        }
        Ok(ConformalContext {
            set: set.clone(),
            h,
            h_bracket: None,
            seed,
            truncation: EXPLICIT,
            eigenvalue: grid.eigenvalue,
            table,
            table_max,
            explicit: split.explicit,
            cumulative,
            bulk: split.bulk,
            bulk_cumulative,
            total: acc,
        })
    }

    /// Context at the midpoint of the certified dimension bracket.
    pub fn at_dimension(set: &IndexSet, tol: f64, seed: u64) -> Result<Self> {
        let r = bowen_dimension(set, tol, BowenBudget::default())?;
        let mut ctx = Self::new(set, r.dimension.mid(), seed)?;
        ctx.h_bracket = Some(r.dimension);
        Ok(ctx)
    }

    /// Normalized eigenfunction `ĥ(y)`, `y ∈ [0, 1]`.
    pub fn density(&self, y: f64) -> f64 {
        let u = y.clamp(0.0, 1.0) * TABLE as f64;
        let k = (u as usize).min(TABLE - 1);
        let f = u - k as f64;
        self.table[k] * (1.0 - f) + self.table[k + 1] * f
    }

    fn propose(&self, rng: &mut ChaCha8Rng) -> Result<Digit> {
        let u = rng.gen::<f64>() * self.total;
        let n = self.cumulative.len();
        if n > 0 && u < self.cumulative[n - 1] {
            let k = self.cumulative.partition_point(|&c| c <= u).min(n - 1);
            return Ok(Digit::Small(self.explicit[k]));
        }
        let k = self.bulk_cumulative.partition_point(|&c| c <= u).min(self.bulk.len() - 1);
        self.bulk[k].sample(2.0 * self.h, rng)
    }

    /// One step `x ↦ 1/(i + x)` of the Gibbs chain; returns the digit and
    /// the log of its transition probability.
    pub fn step(&self, x: f64, rng: &mut ChaCha8Rng) -> Result<(Digit, f64)> {
        let s = 2.0 * self.h;
        for _ in 0..100_000 {
            let d = self.propose(rng)?;
            let (y, ln_ratio) = match &d {
                Digit::Small(i) => {
                    let i = *i as f64;
                    (1.0 / (i + x), -s * (x / i).ln_1p())
                }
                Digit::Big(_) => (0.0, 0.0),
            };
            let hy = self.density(y);
            let acc = ln_ratio.exp() * hy / self.table_max;
            if rng.gen::<f64>() < acc {
                let ln_p = -s * ln_digit_plus(&d, x) + hy.ln() - self.eigenvalue.ln() - self.density(x).ln();
                return Ok((d, ln_p.min(0.0)));
            }
        }
        Err(Error::Convergence("rejection sampler stalled".into()))
    }

    /// `(x_{k+1}, ln x_{k+1})` after appending digit `d` to state `x`.
    pub fn advance(x: f64, d: &Digit) -> (f64, f64) {
        let ln = -ln_digit_plus(d, x);
        (ln.exp(), ln)
    }

    /// Chain started at `x = 0`, after burn-in.
    fn chain(&self, replica: u64) -> (ChaCha8Rng, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(replica));
        let mut x = 0.0;
        for _ in 0..BURN_IN {
            if let Ok((d, _)) = self.step(x, &mut rng) {
                x = Self::advance(x, &d).0;
            }
        }
        (rng, x)
    }

    /// `μ_I`-distributed point with its first `depth` digits.
    pub fn sample_point(&self, depth: usize, replica: u64) -> Result<SamplePath> {
        if depth == 0 {
            return Err(Error::Domain("depth must be >= 1".into()));
        }
        let (mut rng, mut x) = self.chain(replica);
        let start = x;
        let mut digits = Vec::with_capacity(depth);
        let mut probs = Vec::with_capacity(depth);
        for _ in 0..depth {
            let (d, lp) = self.step(x, &mut rng)?;
            x = Self::advance(x, &d).0;
            digits.push(d);
            probs.push(lp);
        }
        // the chain builds the expansion of its state from the inside out
        digits.reverse();
        probs.reverse();
        Ok(SamplePath::from_parts(digits, probs, start))
    }

    /// `n` states of the chain (replicas of equal length), each `μ_I`-distributed.
    pub fn sample_states(&self, n: usize, replicas: usize) -> Result<Vec<f64>> {
        let replicas = replicas.max(1);
        let per = n.div_ceil(replicas);
        let parts: Result<Vec<Vec<f64>>> = (0..replicas)
            .into_par_iter()
            .map(|r| {
                let (mut rng, mut x) = self.chain(r as u64);
                let mut out = Vec::with_capacity(per);
                for _ in 0..per {
                    let (d, _) = self.step(x, &mut rng)?;
                    x = Self::advance(x, &d).0;
                    out.push(x);
                }
                Ok(out)
            })
            .collect();
        let mut v: Vec<f64> = parts?.into_iter().flatten().collect();
        v.truncate(n);
        Ok(v)
    }
}

/// `ln(d + x)` for `x ∈ [0, 1]`.
fn ln_digit_plus(d: &Digit, x: f64) -> f64 {
    match d {
        Digit::Small(i) => {
            let i = *i as f64;
            i.ln() + (x / i).ln_1p()
        }
        Digit::Big(_) => d.ln(),
    }
}

/// A sampled point through its digits (in expansion order).
#[derive(Clone, Debug, Serialize)]
pub struct SamplePath {
    pub digits: Vec<Digit>,
    /// `ln q_{n+1}` after the first `n+1` digits.
    pub log_q: Vec<f64>,
    /// Log transition probability of each digit.
    pub log_prob: Vec<f64>,
    /// `Σ_{j<=n} η(G^j x)`.
    pub eta_sums: Vec<f64>,
    /// `Σ_{j<=n} log|G'(G^j x)|`.
    pub log_deriv_sums: Vec<f64>,
    /// Chain state before the recorded digits.
    pub start: f64,
}

impl SamplePath {
    fn from_parts(digits: Vec<Digit>, log_prob: Vec<f64>, start: f64) -> Self {
        let (log_q, eta_sums, log_deriv_sums) = Self::sums(&digits, start);
        SamplePath { digits, log_q, log_prob, eta_sums, log_deriv_sums, start }
    }

    /// Birkhoff sums recomputed from the digits.
    pub fn sums(digits: &[Digit], start: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = digits.len();
        let mut eta = Vec::with_capacity(n);
        let mut acc = 0.0;
        for d in digits {
            acc += d.eta();
            eta.push(acc);
        }
        // states G^j x for j = n-1 down to 0
        let mut ln_state = vec![0.0; n];
        let mut x = start;
        for j in (0..n).rev() {
            let (nx, ln) = ConformalContext::advance(x, &digits[j]);
            x = nx;
            ln_state[j] = ln;
        }
        let mut deriv = Vec::with_capacity(n);
        let mut acc = 0.0;
        for l in &ln_state {
            acc += -2.0 * l;
            deriv.push(acc);
        }
        (log_q_sequence(digits), eta, deriv)
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn eta(&self, n: usize) -> f64 {
        self.digits[n].eta()
    }

    /// Exact convergents of the recorded prefix.
    pub fn word(&self) -> Result<DigitWord> {
        DigitWord::from_digit_seq(&self.digits)
    }
}

/// `ln q_n` for `n = 1..=len` from the ratio recursion
/// `q_{n+1}/q_n = ω_n + q_{n-1}/q_n`.
pub fn log_q_sequence(digits: &[Digit]) -> Vec<f64> {
    let mut out = Vec::with_capacity(digits.len());
    let (mut lq, mut r) = (0.0f64, 0.0f64);
    for d in digits {
        let step = ln_digit_plus(d, r);
        lq += step;
        r = (-step).exp();
        out.push(lq);
    }
    out
}

/// `[4^{-h} q_n^{-2h}, q_n^{-2h}] ∋ m_I(S_ω)`.
pub fn cylinder_mass_bracket(ctx: &ConformalContext, w: &DigitWord) -> Result<Bracket> {
    for d in w.digits() {
        if !ctx.set.contains(d) {
            return Err(Error::Domain(format!("digit {d} is not in the alphabet")));
        }
    }
    let lq = ln_big_bracket(w.q_cur());
    let hi = lq.scale(-2.0 * ctx.h).exp();
    let lo = hi.mul(Bracket::point(4.0).powf(-ctx.h));
    Ok(Bracket::new(lo.lo, hi.hi.min(1.0)))
}

/// `1 − 4^{-h} Σ_{i∈I, i>k} i^{-2h}`, clamped to `[0, 1]`; bounds the
/// share of `S_ω` whose next digit is at most `k`.
pub fn survival_ratio_bound(ctx: &ConformalContext, w: &DigitWord, k: u64) -> Result<f64> {
    for d in w.digits() {
        if !ctx.set.contains(d) {
            return Err(Error::Domain(format!("digit {d} is not in the alphabet")));
        }
    }
    survival_factor(&ctx.set, ctx.h, k)
}

pub(crate) fn survival_factor(set: &IndexSet, h: f64, k: u64) -> Result<f64> {
    let tail = set.tail_sum(k, 2.0 * h);
    if !tail.is_finite() {
        return Err(Error::Domain(format!("Σ i^(-{}) diverges", 2.0 * h)));
    }
    let v = Bracket::ONE.sub(tail.mul(Bracket::point(4.0).powf(-h)));
    Ok(v.hi.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    pub birkhoff: f64,
    pub stderr: f64,
    pub n_steps: usize,
    pub replicas: usize,
    /// Per-replica averages.
    pub per_replica: Vec<f64>,
    /// `Σ_{i≤T} log(1+i)·m_I(S_i)` with the cylinder mass brackets.
    pub series: Bracket,
    pub series_truncation: u64,
    /// Width of the `h` bracket the context was built from, if any.
    pub h_width: Option<f64>,
}

/// Birkhoff average of `log|G'| = −2 log x` along sampled orbits.
pub fn lyapunov_estimate(ctx: &ConformalContext, n_steps: usize, replicas: usize) -> Result<LyapunovEstimate> {
    let replicas = replicas.max(1);
    const BATCHES: usize = 20;
    let runs: Result<Vec<(f64, Vec<f64>)>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let (mut rng, mut x) = ctx.chain(r as u64);
            let per_batch = (n_steps / BATCHES).max(1);
            let mut batches = Vec::with_capacity(BATCHES);
            let mut total = 0.0;
            let mut count = 0usize;
            let mut b = 0.0;
            for k in 0..n_steps {
                let (d, _) = ctx.step(x, &mut rng)?;
                let (nx, ln) = ConformalContext::advance(x, &d);
                x = nx;
                b += -2.0 * ln;
                total += -2.0 * ln;
                count += 1;
                if (k + 1) % per_batch == 0 {
                    batches.push(b / per_batch as f64);
                    b = 0.0;
                }
            }
            Ok((total / count.max(1) as f64, batches))
        })
        .collect();
    let runs = runs?;
    let per_replica: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mean = per_replica.iter().sum::<f64>() / replicas as f64;
    let batch: Vec<f64> = runs.iter().flat_map(|r| r.1.iter().cloned()).collect();
    let nb = batch.len().max(2) as f64;
    let bm = batch.iter().sum::<f64>() / nb;
    let var = batch.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (nb - 1.0);
    let series = lyapunov_series(&ctx.set, ctx.h, &BigUint::from(EXPLICIT));
    Ok(LyapunovEstimate {
        birkhoff: mean,
        stderr: (var / nb).sqrt(),
        n_steps,
        replicas,
        per_replica,
        series,
        series_truncation: EXPLICIT,
        h_width: ctx.h_bracket.map(|b| b.width()),
    })
}

/// `Σ_{i∈I, i≤T} log(1+i)·[4^{-h} i^{-2h}, i^{-2h}]`.
pub fn lyapunov_series(set: &IndexSet, h: f64, t: &BigUint) -> Bracket {
    let s = 2.0 * h;
    let four = Bracket::point(4.0).powf(-h);
    let mut acc = DirectedSum::default();
    let tu = t.to_u64().unwrap_or(u64::MAX);
    let cut = tu.min(1 << 20);
    let split = set.split(cut);
    for &i in &split.explicit {
        let bi = int_bracket(i);
        acc.add(bi.add(Bracket::ONE).ln().mul(pow_neg(bi, s)));
    }
    for part in &split.bulk {
        match part {
            BulkPart::List(v) => {
                for &i in v.iter().filter(|&&i| i <= tu) {
                    let bi = int_bracket(i);
                    acc.add(bi.add(Bracket::ONE).ln().mul(pow_neg(bi, s)));
                }
            }
            BulkPart::Block(b) => {
                if &b.start > t {
                    continue;
                }
                let end = if &b.end > t { t.clone() } else { b.end.clone() };
                let blk = crate::indexsets::Block { start: b.start.clone(), end: end.clone() };
                let w = blk.power_sum(s, 0.0, 0.0);
                let ln = Bracket::new(ln_big_bracket(&b.start).lo, ln_big_bracket(&(end + 1u32)).hi);
                acc.add(w.mul(ln));
            }
            BulkPart::Tail(tl) => {
                // dyadic shells (2^k, 2^{k+1}] up to T
                let mut lo = tl.after.max(cut);
                while lo < tu {
                    let hi = lo.saturating_mul(2).min(tu);
                    let w = tl.rule.tail_sum(lo, s).sub(tl.rule.tail_sum(hi, s));
                    let w = Bracket::new(w.lo.max(0.0), w.hi);
                    let ln = Bracket::new((lo as f64 + 1.0).ln(), (hi as f64 + 1.0).ln());
                    acc.add(w.mul(ln));
                    lo = hi;
                }
            }
        }
    }
    let b = acc.bracket();
    Bracket::new(b.lo * four.lo, b.hi)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayQuery {
    pub center: f64,
    pub radius: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub center: f64,
    pub radius: f64,
    pub epsilon: f64,
    pub inner: usize,
    pub outer: usize,
    pub ratio: Option<f64>,
    pub alpha_hat: Option<f64>,
    /// Ratio near 1 although `ε` is small.
    pub non_decay: bool,
    pub inconclusive: bool,
}

const DECAY_REPLICAS: usize = 8;

/// Empirical `μ(B(x, εr))/μ(B(x, r))` from `n_samples` chain states.
pub fn decay_probe(ctx: &ConformalContext, queries: &[DecayQuery], n_samples: usize, min_outer: usize) -> Result<Vec<DecayRow>> {
    let mut pts = ctx.sample_states(n_samples, DECAY_REPLICAS)?;
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let count = |c: f64, r: f64| pts.partition_point(|&p| p <= c + r) - pts.partition_point(|&p| p < c - r);
    Ok(queries
        .iter()
        .map(|q| {
            let outer = count(q.center, q.radius);
            let inner = count(q.center, q.epsilon * q.radius);
            let inconclusive = outer < min_outer.max(1);
            let ratio = (!inconclusive).then(|| inner as f64 / outer as f64);
            let alpha_hat = ratio.filter(|&r| r > 0.0 && q.epsilon < 1.0).map(|r| r.ln() / q.epsilon.ln());
            DecayRow {
                center: q.center,
                radius: q.radius,
                epsilon: q.epsilon,
                inner,
                outer,
                ratio,
                alpha_hat,
                non_decay: ratio.is_some_and(|r| r >= 0.9) && q.epsilon <= 0.25,
                inconclusive,
            }
        })
        .collect())
}

/// The paired balls around `a^{-n}`: radii `a^{-n} − 1/(a^n+1)` and
/// `a^{-n} − a^{-n-1}`, which meet `J_I` in the same set for `I = {a, a², …}`.
pub fn geometric_pairs(a: u64, ns: std::ops::RangeInclusive<u32>) -> Vec<DecayQuery> {
    ns.map(|n| {
        let an = (a as f64).powi(n as i32);
        let inner = 1.0 / an - 1.0 / (an + 1.0);
        let outer = 1.0 / an - 1.0 / (an * a as f64);
        DecayQuery { center: 1.0 / an, radius: outer, epsilon: inner / outer }
    })
    .collect()
}

/// CSV rows `replica,step,digit,log_q,eta_partial_sum`.
pub fn write_paths_csv<W: Write>(paths: &[SamplePath], mut w: W) -> std::io::Result<()> {
    writeln!(w, "replica,step,digit,log_q,eta_partial_sum")?;
    for (r, p) in paths.iter().enumerate() {
        for k in 0..p.depth() {
            writeln!(w, "{r},{k},{},{},{}", p.digits[k], p.log_q[k], p.eta_sums[k])?;
        }
    }
    Ok(())
}
