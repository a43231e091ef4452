//! Numerical checkers for the counting, gap and tail criteria that
//! characterize Ahlfors regularity of the conformal measure on `J_I`.

use super::rules::{int_bracket, pow_neg};
use super::IndexSet;
use crate::bracket::{Bracket, DirectedSum};
use crate::contfrac::ln_big;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PassWithConstants,
    FailWithWitness,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::PassWithConstants => "pass-with-constants",
            Verdict::FailWithWitness => "fail-with-witness",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    C1,
    C2,
    C3,
    LowerB,
    UpperB,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Criterion::C1 => "c1",
            Criterion::C2 => "c2",
            Criterion::C3 => "c3",
            Criterion::LowerB => "lower-b",
            Criterion::UpperB => "upper-b",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckFragment {
    pub criterion: Criterion,
    pub h: Option<f64>,
    pub verdict: Verdict,
    /// Observed `[min, max]` of the normalized quantity (c1, c3).
    pub range: Option<(f64, f64)>,
    /// Gap multiplier (c2) or supremum estimate (lower-b).
    pub value: Option<f64>,
    pub log2_value: Option<f64>,
    /// Pair infimum and tail infimum (upper-b).
    pub infima: Option<(f64, f64)>,
    pub witness: Option<String>,
    pub samples: usize,
}

impl CheckFragment {
    fn new(criterion: Criterion, h: Option<f64>) -> Self {
        CheckFragment {
            criterion,
            h,
            verdict: Verdict::Inconclusive,
            range: None,
            value: None,
            log2_value: None,
            infima: None,
            witness: None,
            samples: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub h: f64,
    pub fragments: Vec<CheckFragment>,
}

impl RegularityReport {
    /// Fail beats inconclusive beats pass.
    pub fn overall(&self) -> Verdict {
        let vs: Vec<Verdict> = self.fragments.iter().map(|f| f.verdict).collect();
        if vs.contains(&Verdict::FailWithWitness) {
            Verdict::FailWithWitness
        } else if vs.contains(&Verdict::Inconclusive) || vs.is_empty() {
            Verdict::Inconclusive
        } else {
            Verdict::PassWithConstants
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CheckConfig {
    /// Pass iff max/min of a normalized quantity stays below this.
    pub tolerance: f64,
    /// Dyadic grids run over `2^0 ..= 2^max_exponent`.
    pub max_exponent: u32,
    /// Number of ball centres for c1.
    pub centers: usize,
    /// Cap for the lower-(b) supremum and the c2 multiplier.
    pub cap: f64,
    /// Elements enumerated one by one before the checker gives up.
    pub enumeration_budget: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { tolerance: 64.0, max_exponent: 40, centers: 48, cap: 64.0, enumeration_budget: 1 << 22 }
    }
}

fn ratio_verdict(lo: f64, hi: f64, tol: f64) -> Verdict {
    if lo > 0.0 && hi / lo <= tol {
        Verdict::PassWithConstants
    } else {
        Verdict::FailWithWitness
    }
}

/// `#(B(y, r) ∩ I) / r^h` for centres `y ∈ I` and radii `r = 2^{j/2}`.
pub fn check_c1(set: &IndexSet, h: f64, cfg: &CheckConfig) -> CheckFragment {
    let mut frag = CheckFragment::new(Criterion::C1, Some(h));
    let horizon = 1u64 << cfg.max_exponent.min(62);
    // centres: the first elements, then the first element after 1.5^j
    let mut centers: Vec<u64> = Vec::new();
    let mut k = BigUint::one();
    while centers.len() < cfg.centers / 2 {
        match set.next_at_or_after(&k).and_then(|e| e.to_u64()) {
            Some(e) if e <= horizon / 2 => {
                centers.push(e);
                k = BigUint::from(e + 1);
            }
            _ => break,
        }
    }
    let mut x = 1.0f64;
    while centers.len() < cfg.centers && x < (horizon / 2) as f64 {
        if let Some(e) = set.next_at_or_after(&BigUint::from(x as u64)).and_then(|e| e.to_u64()) {
            if e <= horizon / 2 && !centers.contains(&e) {
                centers.push(e);
            }
        }
        x *= 1.5;
    }
    if centers.is_empty() {
        frag.witness = Some("no centres below the horizon".into());
        return frag;
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let (mut w_lo, mut w_hi) = ((0, 0.0), (0, 0.0));
    for &y in &centers {
        for j in 0..=(2 * cfg.max_exponent) {
            let r = 2f64.powf(j as f64 / 2.0);
            let rf = r.floor() as u64;
            if y.saturating_add(rf) > horizon {
                break;
            }
            let count = set.count_in(y.saturating_sub(rf).max(1), y + rf) as f64;
            let ratio = count / r.powf(h);
            frag.samples += 1;
            if ratio < lo {
                lo = ratio;
                w_lo = (y, r);
            }
            if ratio > hi {
                hi = ratio;
                w_hi = (y, r);
            }
        }
    }
    frag.range = Some((lo, hi));
    frag.verdict = ratio_verdict(lo, hi, cfg.tolerance);
    if frag.verdict == Verdict::FailWithWitness {
        frag.witness = Some(format!("min {lo:.4e} at (y={}, r={:.1}); max {hi:.4e} at (y={}, r={:.1})", w_lo.0, w_lo.1, w_hi.0, w_hi.1));
    }
    frag
}

/// Largest `⌈e/k⌉` over `k <= k_max`, `e` the least element `>= k`.
pub fn check_c2_gap(set: &IndexSet, k_max: &BigUint, cfg: &CheckConfig) -> CheckFragment {
    let mut frag = CheckFragment::new(Criterion::C2, None);
    let mut k = BigUint::one();
    let mut best = BigUint::one();
    let mut best_k = BigUint::one();
    let mut steps = 0u64;
    while &k <= k_max {
        if steps >= cfg.enumeration_budget {
            frag.witness = Some(format!("enumeration budget exhausted at k = {k}"));
            frag.value = best.to_f64();
            frag.log2_value = Some(ln_big(&best) / std::f64::consts::LN_2);
            return frag;
        }
        steps += 1;
        let e = match set.next_at_or_after(&k) {
            Some(e) => e,
            None => {
                frag.verdict = Verdict::FailWithWitness;
                frag.value = Some(f64::INFINITY);
                frag.log2_value = Some(f64::INFINITY);
                frag.witness = Some(format!("no element at or above k = {k}"));
                frag.samples = steps as usize;
                return frag;
            }
        };
        let m = e.div_ceil(&k);
        if m > best {
            best = m;
            best_k = k.clone();
        }
        // jump to the end of the run of consecutive elements starting at e
        let run_end = set.blocks().iter().find(|b| b.start <= e && e <= b.end).map(|b| b.end.clone()).unwrap_or(e);
        k = run_end + 1u32;
    }
    frag.samples = steps as usize;
    frag.value = best.to_f64();
    frag.log2_value = Some(ln_big(&best) / std::f64::consts::LN_2);
    frag.verdict = if best.to_f64().unwrap_or(f64::INFINITY) <= cfg.cap {
        Verdict::PassWithConstants
    } else {
        Verdict::FailWithWitness
    };
    frag.witness = Some(format!("k = {best_k}"));
    frag
}

/// `k^h Σ_{i∈I, i>k} i^{-2h}` over `k = 2^j, 2^j + 1`.
pub fn check_c3_tail(set: &IndexSet, h: f64, cfg: &CheckConfig) -> CheckFragment {
    let mut frag = CheckFragment::new(Criterion::C3, Some(h));
    if !set.power_sum(2.0 * h).is_finite() {
        frag.verdict = Verdict::FailWithWitness;
        frag.witness = Some(format!("Σ i^(-{}) diverges", 2.0 * h));
        return frag;
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let (mut k_lo, mut k_hi) = (0, 0);
    for j in 0..=cfg.max_exponent.min(62) {
        for k in [1u64 << j, (1u64 << j) + 1] {
            let v = set.tail_sum(k, 2.0 * h).mul(int_bracket(k).powf(h));
            frag.samples += 1;
            if v.lo < lo {
                lo = v.lo;
                k_lo = k;
            }
            if v.hi > hi {
                hi = v.hi;
                k_hi = k;
            }
        }
    }
    frag.range = Some((lo, hi));
    frag.verdict = ratio_verdict(lo, hi, cfg.tolerance);
    if frag.verdict == Verdict::FailWithWitness {
        frag.witness = Some(format!("min {lo:.4e} at k={k_lo}; max {hi:.4e} at k={k_hi}"));
    }
    frag
}

/// `Σ_{i∈I, lo<=i<=hi} i^{-s}` by enumeration when short, else by tails.
fn range_sum(set: &IndexSet, lo: u64, hi: u64, s: f64, budget: u64) -> Option<Bracket> {
    if set.count_in(lo, hi) <= budget.min(1 << 16) {
        let mut acc = DirectedSum::default();
        let mut k = BigUint::from(lo);
        let top = BigUint::from(hi);
        while let Some(e) = set.next_at_or_after(&k) {
            if e > top {
                break;
            }
            acc.add(pow_neg(int_bracket(e.to_u64()?), s));
            k = e + 1u32;
        }
        return Some(acc.bracket());
    }
    let a = set.tail_sum(lo - 1, s);
    let b = set.tail_sum(hi, s);
    if !a.is_finite() {
        return None;
    }
    Some(Bracket::new((a.lo - b.hi).max(0.0), a.hi - b.lo))
}

/// `(k₁k₂)^h/(k₂−k₁)^h · Σ_{k₁<=i<=k₂} i^{-2h}`.
fn pair_value(set: &IndexSet, h: f64, k1: u64, k2: u64, budget: u64) -> Option<Bracket> {
    let s = range_sum(set, k1, k2, 2.0 * h, budget)?;
    let f = int_bracket(k1).mul(int_bracket(k2)).div(int_bracket(k2 - k1)).powf(h);
    Some(s.mul(f))
}

fn dyadic_pairs(max_exponent: u32) -> Vec<(u64, u64)> {
    let e = max_exponent.min(62);
    let mut out = Vec::new();
    for a in 0..e {
        let k1 = 1u64 << a;
        for b in (a + 1)..=e {
            out.push((k1, 1u64 << b));
        }
        for c in 0..a {
            out.push((k1, k1 + (1u64 << c)));
        }
    }
    out
}

/// Supremum of the lower-regularity pair expression over a dyadic pair grid.
pub fn check_lower_b(set: &IndexSet, h: f64, cfg: &CheckConfig) -> CheckFragment {
    let mut frag = CheckFragment::new(Criterion::LowerB, Some(h));
    let mut sup = 0.0f64;
    let mut arg = (0, 0);
    let mut skipped = 0;
    for (k1, k2) in dyadic_pairs(cfg.max_exponent) {
        match pair_value(set, h, k1, k2, cfg.enumeration_budget) {
            Some(v) => {
                frag.samples += 1;
                if v.hi > sup {
                    sup = v.hi;
                    arg = (k1, k2);
                }
            }
            None => skipped += 1,
        }
    }
    frag.value = Some(sup);
    frag.verdict = if frag.samples == 0 {
        Verdict::Inconclusive
    } else if sup <= cfg.cap {
        Verdict::PassWithConstants
    } else {
        Verdict::FailWithWitness
    };
    frag.witness = Some(format!("sup at (k1={}, k2={}); {skipped} pairs skipped", arg.0, arg.1));
    frag
}

/// Restricted pair infimum and `inf_k k^h Σ_{i>=k} i^{-2h}`.
pub fn check_upper_b(set: &IndexSet, h: f64, cfg: &CheckConfig) -> CheckFragment {
    let mut frag = CheckFragment::new(Criterion::UpperB, Some(h));
    if set.is_finite() {
        frag.verdict = Verdict::FailWithWitness;
        frag.witness = Some("finite alphabet: tail infimum is 0".into());
        frag.infima = Some((0.0, 0.0));
        return frag;
    }
    let mut pair_inf = f64::INFINITY;
    let mut pair_arg = (0, 0);
    for (k1, k2) in dyadic_pairs(cfg.max_exponent) {
        // B(2k₁k₂/(k₁+k₂), 1) meets I
        let c = 2.0 * k1 as f64 * k2 as f64 / (k1 + k2) as f64;
        let (a, b) = ((c - 1.0).ceil().max(1.0) as u64, (c + 1.0).floor() as u64);
        if set.count_in(a, b) == 0 {
            continue;
        }
        if let Some(v) = pair_value(set, h, k1, k2, cfg.enumeration_budget) {
            frag.samples += 1;
            if v.lo < pair_inf {
                pair_inf = v.lo;
                pair_arg = (k1, k2);
            }
        }
    }
    let mut tail_inf = f64::INFINITY;
    let mut tail_arg = 0;
    if set.power_sum(2.0 * h).is_finite() {
        for j in 0..=cfg.max_exponent.min(62) {
            for k in [1u64 << j, (1u64 << j) + 1] {
                let v = set.tail_sum(k - 1, 2.0 * h).mul(int_bracket(k).powf(h));
                frag.samples += 1;
                if v.lo < tail_inf {
                    tail_inf = v.lo;
                    tail_arg = k;
                }
            }
        }
    }
    frag.infima = Some((pair_inf, tail_inf));
    let floor = 1.0 / cfg.tolerance;
    frag.verdict = if pair_inf >= floor && tail_inf >= floor {
        Verdict::PassWithConstants
    } else {
        Verdict::FailWithWitness
    };
    frag.witness = Some(format!("pair inf at (k1={}, k2={}); tail inf at k={tail_arg}", pair_arg.0, pair_arg.1));
    frag
}

/// All five checkers at exponent `h`.
pub fn regularity_report(set: &IndexSet, h: f64, k_max: &BigUint, cfg: &CheckConfig) -> RegularityReport {
    RegularityReport {
        h,
        fragments: vec![
            check_c1(set, h, cfg),
            check_c2_gap(set, k_max, cfg),
            check_c3_tail(set, h, cfg),
            check_lower_b(set, h, cfg),
            check_upper_b(set, h, cfg),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::{make_full, make_geometric, make_i0, parse_set};

    fn cfg() -> CheckConfig {
        CheckConfig { max_exponent: 24, ..Default::default() }
    }

    #[test]
    fn c1_on_naturals() {
        let f = check_c1(&make_full(), 1.0, &cfg());
        let (lo, hi) = f.range.unwrap();
        assert!(lo >= 1.0 - 1e-9 && hi <= 3.0 + 1e-9, "{lo} {hi}");
        assert_eq!(f.verdict, Verdict::PassWithConstants);
    }

    #[test]
    fn c1_on_i0_and_geometric() {
        let f = check_c1(&make_i0(0.5).unwrap(), 0.5, &cfg());
        assert_eq!(f.verdict, Verdict::PassWithConstants, "{f:?}");
        let g = check_c1(&make_geometric(2).unwrap(), 0.5, &cfg());
        assert_eq!(g.verdict, Verdict::FailWithWitness);
    }

    #[test]
    fn c2_values() {
        let k = BigUint::from(1u64 << 20);
        assert_eq!(check_c2_gap(&make_full(), &k, &cfg()).value, Some(1.0));
        assert_eq!(check_c2_gap(&make_geometric(2).unwrap(), &k, &cfg()).value, Some(2.0));
        let fin = check_c2_gap(&parse_set("1,2,3").unwrap(), &k, &cfg());
        assert_eq!(fin.verdict, Verdict::FailWithWitness);
    }

    #[test]
    fn c3_values() {
        let f = check_c3_tail(&make_full(), 1.0, &cfg());
        let (lo, hi) = f.range.unwrap();
        assert!(lo > 0.5 && hi <= 1.0 + 1e-9, "{lo} {hi}");
        let g = check_c3_tail(&make_geometric(2).unwrap(), 0.5, &CheckConfig { max_exponent: 40, ..cfg() });
        assert_eq!(g.verdict, Verdict::FailWithWitness);
    }

    #[test]
    fn b_checks_on_naturals() {
        let lo = check_lower_b(&make_full(), 1.0, &cfg());
        assert!(lo.value.unwrap() <= 4.0, "{lo:?}");
        let up = check_upper_b(&make_full(), 1.0, &cfg());
        let (a, b) = up.infima.unwrap();
        assert!(a >= 0.5 && b >= 0.5, "{a} {b}");
        let single = check_lower_b(&parse_set("1").unwrap(), 0.0, &cfg());
        assert!(single.value.unwrap() >= 1.0);
    }

    #[test]
    fn upper_b_fails_on_geometric() {
        let f = check_upper_b(&make_geometric(2).unwrap(), 0.3, &CheckConfig { max_exponent: 60, ..cfg() });
        assert_eq!(f.verdict, Verdict::FailWithWitness);
    }
}
