//! Level sums `S_n = Σ_{ω ∈ I^n} q_n(ω)^{-2t}` and the brackets they give for
//! `λ_t(I)`.

use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::indexsets::IndexSet;
use rayon::prelude::*;
use serde::Serialize;

/// Per-depth sums for a truncated alphabet.
#[derive(Clone, Debug, Serialize)]
pub struct LevelSumTable {
    pub t: f64,
    pub truncation: u64,
    pub digits: Vec<u64>,
    /// Enclosures of `Σ_{ω ∈ (I∩[1,N])^n} q_n^{-2t}`, index `n-1`.
    pub sums: Vec<Bracket>,
    /// `Σ_{i ∈ I, i > N} i^{-2t}`; zero for finite alphabets covered by `N`.
    pub tail: Bracket,
}

/// Depth-first enumeration of all words of length `n` over `digits`,
/// summing `q^{-2t}` with a relative error bound.
fn enumerate(digits: &[u64], t: f64, n: usize) -> Result<(f64, f64, u64)> {
    fn rec(digits: &[u64], t2: f64, depth: usize, qp: u128, q: u128, acc: &mut (f64, f64, u64)) -> Result<()> {
        if depth == 0 {
            let qf = q as f64;
            let v = (-t2 * qf.ln()).exp();
            acc.0 += v;
            acc.1 = acc.1.max(qf.ln());
            acc.2 += 1;
            return Ok(());
        }
        for &d in digits {
            let qn = (d as u128)
                .checked_mul(q)
                .and_then(|v| v.checked_add(qp))
                .ok_or_else(|| Error::Budget("convergent denominator exceeds 128 bits".into()))?;
            rec(digits, t2, depth - 1, q, qn, acc)?;
        }
        Ok(())
    }
    let t2 = 2.0 * t;
    let parts: Vec<Result<(f64, f64, u64)>> = digits
        .par_iter()
        .map(|&d| {
            let mut acc = (0.0, 0.0, 0);
            rec(digits, t2, n - 1, 1, d as u128, &mut acc)?;
            Ok(acc)
        })
        .collect();
    let mut total = (0.0, 0.0, 0u64);
    for p in parts {
        let p = p?;
        total.0 += p.0;
        total.1 = f64::max(total.1, p.1);
        total.2 += p.2;
    }
    Ok(total)
}

/// Enclosure of the depth-`n` level sum over `I ∩ [1, N]`.
pub fn level_sum(set: &IndexSet, t: f64, n: usize, truncation: u64, max_words: u64) -> Result<Bracket> {
    let digits = set.elements_upto(truncation);
    level_sum_digits(&digits, t, n, max_words)
}

pub fn level_sum_digits(digits: &[u64], t: f64, n: usize, max_words: u64) -> Result<Bracket> {
    if n == 0 {
        return Err(Error::Domain("level sums need depth n >= 1".into()));
    }
    if t < 0.0 {
        return Err(Error::Domain("t must be >= 0".into()));
    }
    let words = (digits.len() as f64).powi(n as i32);
    if words > max_words as f64 {
        return Err(Error::Budget(format!(
            "{} words at depth {n} exceeds the enumeration budget {max_words}",
            words
        )));
    }
    let (sum, max_ln_q, count) = enumerate(digits, t, n)?;
    // each term: ln has relative error <= 2 ulp, the product with 2t adds an
    // absolute error <= 2t·ln q·2^-52, exp adds 2 ulp; summation adds count ulp.
    let eps = f64::EPSILON;
    let term_rel = 4.0 * eps + 2.0 * t * max_ln_q * 2.0 * eps;
    let rel = term_rel + (count as f64 + 2.0) * eps;
    Ok(Bracket::new((sum * (1.0 - rel)).next_down(), (sum * (1.0 + rel)).next_up()))
}

/// Level sums `n = 1..=n_max` with the tail term for infinite alphabets.
pub fn level_sum_table(set: &IndexSet, t: f64, n_max: usize, truncation: u64, max_words: u64) -> Result<LevelSumTable> {
    let digits = set.elements_upto(truncation);
    if digits.is_empty() {
        return Err(Error::Domain("no digits below the truncation".into()));
    }
    let mut sums = Vec::new();
    for n in 1..=n_max {
        match level_sum_digits(&digits, t, n, max_words) {
            Ok(b) => sums.push(b),
            Err(Error::Budget(_)) if !sums.is_empty() => break,
            Err(e) => return Err(e),
        }
    }
    let tail = set.tail_sum(truncation, 2.0 * t);
    Ok(LevelSumTable { t, truncation, digits, sums, tail })
}

impl LevelSumTable {
    /// `[max_n (4^{-t} S_n)^{1/n}, min_n Ŝ_n^{1/n}]`, where `Ŝ_n` adds the
    /// words using at least one digit above the truncation:
    /// `Ŝ_n = S_n + (S_1 + T)^n − S_1^n` (each such word's weight is at most
    /// the product of its single-digit weights).
    pub fn lambda_bracket(&self) -> Bracket {
        let t = self.t;
        let four_t = Bracket::point(4.0).powf(-t);
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let s1 = self.sums[0];
        for (k, s) in self.sums.iter().enumerate() {
            let n = (k + 1) as f64;
            let l = s.mul(four_t).powf(1.0 / n);
            lo = lo.max(l.lo);
            let upper = if self.tail.hi == 0.0 {
                *s
            } else if !self.tail.is_finite() {
                Bracket::new(f64::INFINITY, f64::INFINITY)
            } else {
                let with_tail = s1.add(self.tail).powf(n);
                let trunc = s1.powf(n);
                Bracket::new(s.lo, s.add(with_tail).sub(trunc).hi)
            };
            hi = hi.min(upper.powf(1.0 / n).hi);
        }
        if !self.tail.is_finite() {
            return Bracket::new(f64::INFINITY, f64::INFINITY);
        }
        Bracket::new(lo, hi.max(lo))
    }
}

/// `λ_t(I)` bracket from level sums up to depth `n_max` over `I ∩ [1, N]`.
pub fn lambda_bracket(set: &IndexSet, t: f64, n_max: usize, truncation: u64) -> Result<Bracket> {
    Ok(level_sum_table(set, t, n_max, truncation, 50_000_000)?.lambda_bracket())
}

/// Increment window `((1/(i+1))^{2δ}, (2/(i+2))^{2δ})` for adding digit `i`.
pub fn kz_increment_bounds(i: u64, delta: f64) -> Result<(Bracket, Bracket)> {
    if i < 2 {
        return Err(Error::Domain(format!("increment bounds need i >= 2, got {i}")));
    }
    if delta <= 0.0 {
        return Err(Error::Domain("δ must be positive".into()));
    }
    let lo = Bracket::point(i as f64 + 1.0).recip().powf(2.0 * delta);
    let hi = Bracket::point(2.0).div(Bracket::point(i as f64 + 2.0)).powf(2.0 * delta);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::parse_set;

    #[test]
    fn level_sum_examples() {
        let s = parse_set("1,2").unwrap();
        let b1 = level_sum(&s, 1.0, 1, 10, 1 << 20).unwrap();
        assert!(b1.contains(1.25));
        let b2 = level_sum(&s, 1.0, 2, 10, 1 << 20).unwrap();
        assert!(b2.contains(1.0 / 4.0 + 2.0 / 9.0 + 1.0 / 25.0));
        let one = parse_set("1").unwrap();
        // q_n = Fib(n+1): 1, 2, 3, 5, 8, ...
        let b5 = level_sum(&one, 0.7, 5, 10, 1 << 20).unwrap();
        assert!(b5.contains(8f64.powf(-1.4)));
    }

    #[test]
    fn kz_examples() {
        let (lo, hi) = kz_increment_bounds(2, 0.5).unwrap();
        assert!(lo.contains(1.0 / 3.0) && hi.contains(0.5));
        let (lo, hi) = kz_increment_bounds(2, 1.0).unwrap();
        assert!(lo.contains(1.0 / 9.0) && hi.contains(0.25));
        assert!(kz_increment_bounds(1, 1.0).is_err());
    }

    #[test]
    fn singleton_at_zero_is_one() {
        let one = parse_set("1").unwrap();
        let b = lambda_bracket(&one, 0.0, 8, 10).unwrap();
        assert!(b.contains(1.0));
    }
}
