//! The special alphabets: geometric progressions, `I_0`, the greedy set `R`,
//! the Ahlfors-regular combination `I_δ` and the Liouville-supporting set.

use super::audit::AuditLog;
use super::rules::{AffineI0, Full, Geometric, LazyRule};
use super::{Block, FamilyTag, IndexSet, Tail};
use crate::bracket::Bracket;
use crate::contfrac::ln_big_bracket;
use crate::error::{Error, Result};
use crate::pressure::{kz_increment_bounds, operator_bracket, operator_bracket_parts, BulkMoments, CELL_LEVELS};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::sync::Arc;

/// ℕ.
pub fn make_full() -> IndexSet {
    IndexSet::from_rule(Arc::new(Full), FamilyTag::Full)
}

/// `{a, a², a³, …}`.
pub fn make_geometric(a: u64) -> Result<IndexSet> {
    Ok(IndexSet::from_rule(Arc::new(Geometric::new(a)?), FamilyTag::Geometric { a }))
}

/// All sums `1 + Σ_{n∈S} ⌊2^{n/δ}⌋` over finite `S ⊂ {1, 2, …}`.
pub fn make_i0(delta: f64) -> Result<IndexSet> {
    Ok(IndexSet::from_rule(Arc::new(AffineI0::new(delta, 1, 1)?), FamilyTag::I0 { delta }))
}

/// `I_+ = 2·I_0`.
pub fn make_i_plus(delta: f64) -> Result<IndexSet> {
    Ok(IndexSet::from_rule(Arc::new(AffineI0::new(delta, 2, 2)?), FamilyTag::Custom))
}

/// `I_- = 2·I_0 − 1`.
pub fn make_i_minus(delta: f64) -> Result<IndexSet> {
    Ok(IndexSet::from_rule(Arc::new(AffineI0::new(delta, 2, 1)?), FamilyTag::Custom))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConstructionBudget {
    /// Last candidate considered by the greedy constructions.
    pub n_max: u64,
    /// Finest operator grid used before a straddle is declared.
    pub max_cells: usize,
    /// Largest bit length allowed for a Liouville stage start `m_N`.
    pub max_bits: u64,
}

impl Default for ConstructionBudget {
    fn default() -> Self {
        ConstructionBudget { n_max: 2000, max_cells: 1024, max_bits: 1 << 25 }
    }
}

impl ConstructionBudget {
    fn max_level(&self) -> usize {
        CELL_LEVELS.iter().rposition(|&c| c <= self.max_cells).unwrap_or(0)
    }
}

/// One completed stage of the Liouville construction.
#[derive(Clone, Debug, Serialize)]
pub struct LiouvilleStage {
    pub stage: usize,
    pub log2_m: f64,
    pub log2_max: f64,
    /// `log(1 + m_N)` and `N·4^N·log(1 + M_{N-1})` (lower / upper ends).
    pub gap_lhs: f64,
    pub gap_rhs: f64,
    /// Exact check `1 + m_N >= (1 + M_{N-1})^{N·4^N}`.
    pub gap_ok: bool,
    /// Certified upper end of `(2/(m_N+2))^{2δ}` against `2^{-N}`.
    pub kz_value: f64,
    pub kz_cap: f64,
    pub lambda: Bracket,
    pub window: (f64, f64),
    pub window_ok: bool,
    #[serde(skip)]
    pub m: BigUint,
    #[serde(skip)]
    pub max: BigUint,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstructionDetails {
    Greedy { admitted: usize, rejected: usize, lambda: Bracket },
    IDelta { n1: u64, n2: u64, r_head: Vec<u64>, admitted: Vec<u64>, case4: Vec<u64>, lambda: Bracket },
    Liouville { stages: Vec<LiouvilleStage> },
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub set: IndexSet,
    pub audit: AuditLog,
    /// Decisions forced by a bracket straddling the threshold.
    pub straddles: usize,
    pub details: ConstructionDetails,
}

/// Certified `λ_t` of a fixed base set plus greedily added digits.
struct Greedy {
    t: f64,
    base: Option<IndexSet>,
    added: Vec<u64>,
    levels: Vec<Option<(Vec<u64>, BulkMoments)>>,
    max_level: usize,
    current: Bracket,
}

impl Greedy {
    fn new(t: f64, base: Option<IndexSet>, added: Vec<u64>, max_level: usize) -> Result<Self> {
        let mut g = Greedy { t, base, added, levels: vec![None; CELL_LEVELS.len()], max_level, current: Bracket::ZERO };
        g.current = g.refined(None)?;
        Ok(g)
    }

    fn parts(&mut self, level: usize) -> &(Vec<u64>, BulkMoments) {
        if self.levels[level].is_none() {
            let cells = CELL_LEVELS[level] as u64;
            let s0 = 2.0 * self.t;
            let (mut explicit, mut mom) = match &self.base {
                Some(b) => {
                    let sp = b.split(cells);
                    let m = BulkMoments::new(&sp, s0);
                    (sp.explicit, m)
                }
                None => (vec![], BulkMoments::empty(s0, cells)),
            };
            for &a in &self.added {
                if a <= cells {
                    explicit.push(a);
                } else {
                    mom.add_digit(a);
                }
            }
            self.levels[level] = Some((explicit, mom));
        }
        self.levels[level].as_ref().unwrap()
    }

    fn eval(&mut self, level: usize, cand: Option<u64>) -> Result<Bracket> {
        let t = self.t;
        let cells = CELL_LEVELS[level] as u64;
        let (explicit, mom) = self.parts(level);
        match cand {
            None => Ok(operator_bracket_parts(explicit, mom, t)?.lambda),
            Some(n) if n <= cells => {
                let mut e = explicit.clone();
                e.push(n);
                Ok(operator_bracket_parts(&e, mom, t)?.lambda)
            }
            Some(n) => {
                let mut m = mom.clone();
                m.add_digit(n);
                Ok(operator_bracket_parts(explicit, &m, t)?.lambda)
            }
        }
    }

    /// Tightest bracket within the budget (stops once it is narrow).
    fn refined(&mut self, cand: Option<u64>) -> Result<Bracket> {
        let mut b = self.eval(0, cand)?;
        for level in 1..=self.max_level {
            if b.width() < 1e-6 {
                break;
            }
            b = self.eval(level, cand)?;
        }
        Ok(b)
    }

    fn commit(&mut self, n: u64) {
        self.added.push(n);
        for (level, slot) in self.levels.iter_mut().enumerate() {
            if let Some((explicit, mom)) = slot {
                if n <= CELL_LEVELS[level] as u64 {
                    explicit.push(n);
                } else {
                    mom.add_digit(n);
                }
            }
        }
    }

    /// Admit `n` iff the certified `λ_t` upper end of the enlarged set is < 1.
    fn decide(&mut self, n: u64, stage: &str, audit: &mut AuditLog, straddles: &mut usize) -> Result<bool> {
        if n >= 2 && self.current.is_finite() {
            let (lo_inc, hi_inc) = kz_increment_bounds(n, self.t)?;
            let kz = Bracket::new(self.current.lo + lo_inc.lo, (self.current.hi + hi_inc.hi).next_up());
            if kz.hi < 1.0 {
                audit.push(stage, n, kz.lo, kz.hi, "admit", 0);
                self.commit(n);
                self.current = kz;
                return Ok(true);
            }
            if kz.lo >= 1.0 {
                audit.push(stage, n, kz.lo, kz.hi, "reject", 0);
                return Ok(false);
            }
        }
        let mut b = Bracket::ZERO;
        for level in 0..=self.max_level {
            b = self.eval(level, Some(n))?;
            let cells = CELL_LEVELS[level];
            if b.hi < 1.0 {
                audit.push(stage, n, b.lo, b.hi, "admit", cells);
                self.commit(n);
                self.current = b;
                return Ok(true);
            }
            if b.lo >= 1.0 {
                audit.push(stage, n, b.lo, b.hi, "reject", cells);
                if self.current.width() > 1e-3 {
                    self.current = self.eval(level, None)?;
                }
                return Ok(false);
            }
        }
        *straddles += 1;
        audit.push(stage, n, b.lo, b.hi, "reject-straddle", CELL_LEVELS[self.max_level]);
        Ok(false)
    }
}

/// `R_1 = {1}`; `N` joins iff `λ_δ(R_{N-1} ∪ {N}) < 1` is certified.
pub fn build_r(delta: f64, budget: ConstructionBudget) -> Result<Construction> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("δ must lie in (0,1), got {delta}")));
    }
    let mut audit = AuditLog::default();
    let mut straddles = 0;
    let mut g = Greedy::new(delta, None, vec![1], budget.max_level())?;
    audit.push("R", 1, g.current.lo, g.current.hi, "seed", CELL_LEVELS[0]);
    let mut rejected = 0;
    for n in 2..=budget.n_max {
        if !g.decide(n, "R", &mut audit, &mut straddles)? {
            rejected += 1;
        }
    }
    let admitted = g.added.len();
    let set = IndexSet::finite(g.added.clone())?;
    Ok(Construction {
        set,
        audit,
        straddles,
        details: ConstructionDetails::Greedy { admitted, rejected, lambda: g.current },
    })
}

/// Head elements plus a rule tail strictly above `after`; tail elements at
/// or below the largest head element are moved into the head.
fn assemble(mut head: Vec<u64>, rule: Arc<dyn LazyRule>, after: u64, family: FamilyTag) -> Result<IndexSet> {
    head.sort_unstable();
    head.dedup();
    let top = head.last().copied().unwrap_or(0);
    let mut after = after;
    if top > after {
        head.extend(rule.elements_in(after + 1, top));
        head.sort_unstable();
        head.dedup();
        after = top;
    }
    IndexSet::from_parts(head, vec![], Some(Tail { after, rule }), family)
}

/// Least `N` such that `Σ_{i ∈ I_+, i > M} (1+i)^{-2δ} ≥ (2/(2+M))^{2δ}`
/// for every `M ≥ N`: exact below `2^20`, dyadic blocks up to `2^61`.
fn n1_threshold(iplus: &AffineI0, delta: f64) -> u64 {
    const EXACT: u32 = 20;
    let s = 2.0 * delta;
    let kz = |m: f64| Bracket::point(2.0).div(Bracket::point(2.0 + m)).powf(s).hi;
    let holds = |j: u32| iplus.shifted_tail_sum(1u64 << (j + 1), s, 1.0).lo >= kz((1u64 << j) as f64);
    let mut j0 = 61;
    while j0 > EXACT && holds(j0 - 1) {
        j0 -= 1;
    }
    if j0 > EXACT {
        return 1u64 << j0;
    }
    // on [e_k, e_{k+1}) the tail is constant, so failures form a prefix
    let top = 1u64 << EXACT;
    let elems = iplus.elements_in(1, top);
    let mut tail = iplus.shifted_tail_sum(top, s, 1.0).lo;
    let mut threshold = 1u64;
    let mut starts: Vec<u64> = vec![1];
    starts.extend(&elems);
    for k in (0..starts.len()).rev() {
        let m = starts[k];
        if kz(m as f64) > tail {
            let x = Bracket::point(tail).powf(-1.0 / s).scale(2.0).hi - 2.0;
            threshold = threshold.max((x.ceil() as u64).saturating_add(1).min(top + 1));
        }
        if k > 0 {
            tail += Bracket::point(1.0 + starts[k] as f64).powf(-s).lo;
            tail = tail.next_down();
        }
    }
    threshold
}

/// The Ahlfors δ-regular alphabet: `R_{N_1-1}` seeded with the `I_-` tail
/// beyond `N_2`, then greedy over `I_+ ∪ {N_1}` up to `n_max`.
pub fn build_i_delta(delta: f64, budget: ConstructionBudget) -> Result<Construction> {
    if delta == 1.0 {
        return Ok(Construction {
            set: make_full(),
            audit: AuditLog::default(),
            straddles: 0,
            details: ConstructionDetails::Greedy { admitted: 0, rejected: 0, lambda: Bracket::ONE },
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("δ must lie in (0,1], got {delta}")));
    }
    let r = build_r(delta, budget)?;
    let mut audit = r.audit.clone();
    let mut straddles = r.straddles;
    let iplus = AffineI0::new(delta, 2, 2)?;
    let iminus: Arc<dyn LazyRule> = Arc::new(AffineI0::new(delta, 2, 1)?);
    let threshold = n1_threshold(&iplus, delta).max(2);
    let certified_reject: Vec<u64> = r
        .audit
        .records
        .iter()
        .filter(|rec| rec.stage == "R" && rec.decision == "reject")
        .filter_map(|rec| rec.candidate.parse().ok())
        .collect();
    let n1 = *certified_reject
        .iter()
        .find(|&&n| n >= threshold)
        .ok_or_else(|| Error::Construction(format!("no certified rejection of R at or above {threshold} within n_max")))?;
    audit.push("N1", n1, threshold as f64, threshold as f64, "chosen", 0);
    let r_head: Vec<u64> = r.set.head().iter().copied().filter(|&v| v < n1).collect();
    let r_set = IndexSet::finite(r_head.clone())?;
    let max_level = budget.max_level();
    let lam_r = {
        let mut b = operator_bracket(&r_set, delta, CELL_LEVELS[0])?.lambda;
        for level in 1..=max_level {
            b = b.intersect(&operator_bracket(&r_set, delta, CELL_LEVELS[level])?.lambda).unwrap_or(b);
        }
        b
    };
    if lam_r.hi >= 1.0 {
        return Err(Error::Construction("λ_δ(R_{N1-1}) not certified below 1".into()));
    }
    let gap = 1.0 - lam_r.hi;
    let scale = Bracket::point(2.0).powf(2.0 * delta);
    let tail_ok = |k: u64| iminus.shifted_tail_sum(k, 2.0 * delta, 2.0).mul(scale).hi < gap;
    let mut hi = 1u64;
    while !tail_ok(hi) {
        if hi >= 1 << 62 {
            return Err(Error::Construction("N2 not found below 2^62".into()));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n2 = if tail_ok(lo) { lo } else { hi };
    let n2_sum = iminus.shifted_tail_sum(n2, 2.0 * delta, 2.0).mul(scale);
    audit.push("N2", n2, n2_sum.lo, n2_sum.hi, "chosen", 0);
    let base = assemble(r_head.clone(), iminus.clone(), n2, FamilyTag::Combined { delta })?;
    let mut g = Greedy::new(delta, Some(base.clone()), vec![], max_level)?;
    audit.push("I_delta", format!("seed N1-1={}", n1 - 1), g.current.lo, g.current.hi, "seed", CELL_LEVELS[0]);
    if g.current.hi >= 1.0 {
        return Err(Error::Construction("seed set not certified below λ = 1".into()));
    }
    let mut case4 = Vec::new();
    let mut n = n1;
    while n <= budget.n_max {
        if (n == n1 || iplus.contains(&BigUint::from(n))) && !base.contains_u64(n) {
            if !g.decide(n, "I_delta", &mut audit, &mut straddles)? {
                case4.push(n);
            }
        }
        n += 1;
    }
    let admitted = g.added.clone();
    let mut head = r_head.clone();
    head.extend(&admitted);
    let set = assemble(head, iminus, n2, FamilyTag::Combined { delta })?;
    Ok(Construction {
        set,
        audit,
        straddles,
        details: ConstructionDetails::IDelta { n1, n2, r_head, admitted, case4, lambda: g.current },
    })
}

/// `⌊e^u⌋` as a big integer (at least 1).
fn big_from_ln_floor(u: f64) -> BigUint {
    if u < 36.0 {
        return BigUint::from((u.exp().floor() as u64).max(1));
    }
    let bits = u / std::f64::consts::LN_2;
    let shift = bits.floor() as u64 - 52;
    let mant = (bits - shift as f64).exp2().floor() as u64;
    BigUint::from(mant) << shift
}

/// The finite-stage sets `I_N` whose union supports a measure giving full
/// mass to the Liouville numbers; stage `N` adds the block `{m_N, …, K}`.
pub fn build_liouville_set(delta: f64, stages: usize, budget: ConstructionBudget) -> Result<Construction> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain(format!(
            "δ = {delta}: the construction needs Σ (1/(i+1))^(2δ) to diverge, i.e. 0 < δ <= 1/2"
        )));
    }
    let mut audit = AuditLog::default();
    let mut blocks: Vec<Block> = Vec::new();
    let mut big_m = BigUint::zero();
    let mut infos = Vec::new();
    let ln2 = Bracket::point(2.0).ln();
    let max_level = budget.max_level();
    let s = 2.0 * delta;
    for n in 1..=stages {
        let stage = format!("liouville-{n}");
        let cap = 0.5f64.powi(n as i32);
        let target_hi = 1.0 - cap;
        let target_lo = 1.0 - 2.0 * cap;
        // step 3: log(1+m) >= N 4^N log(1+M_{N-1}), i.e. 1+m >= (1+M_{N-1})^{N 4^N}
        let ln_m1 = if big_m.is_zero() { Bracket::ZERO } else { ln_big_bracket(&(&big_m + 1u32)) };
        let power = (n as u64).checked_mul(4u64.checked_pow(n as u32).unwrap_or(u64::MAX)).unwrap_or(u64::MAX);
        let rhs = ln_m1.scale(power as f64);
        let bits = (&big_m + 1u32).bits().saturating_mul(power);
        if bits > budget.max_bits.saturating_add(power) {
            return Err(Error::Budget(format!("stage {n} needs m_N ≈ 2^{:.0}, above the {} bit budget", rhs.mid() / std::f64::consts::LN_2, budget.max_bits)));
        }
        let bound = num_traits::pow::pow(&big_m + 1u32, power as usize);
        let mut m = bound - 1u32;
        // (2/(m+2))^{2δ} <= 2^{-N}
        let kz_min = (2f64.powf(1.0 + n as f64 / s) - 2.0).ceil().max(1.0) as u64;
        if m < BigUint::from(kz_min) {
            m = BigUint::from(kz_min);
        }
        if m <= big_m {
            m = &big_m + 1u32;
        }
        let kz_value = |m: &BigUint| -> f64 {
            let lm = ln_big_bracket(&(m + 2u32));
            ln2.sub(lm).scale(s).exp().hi
        };
        while kz_value(&m) > cap {
            m += 1u32;
        }
        let gap_lhs = ln_big_bracket(&(&m + 1u32)).lo;
        let gap_ok = &m + 1u32 >= num_traits::pow::pow(&big_m + 1u32, power as usize);
        audit.push(&stage, format!("m_N=2^{:.6}", ln_big_bracket(&m).mid() / std::f64::consts::LN_2), gap_lhs, rhs.hi, "m-chosen", 0);
        let lam_of = |len: &BigUint, level: usize| -> Result<Bracket> {
            let mut bl = blocks.clone();
            bl.push(Block { start: m.clone(), end: &m + len - 1u32 });
            let set = IndexSet::from_parts(vec![], bl, None, FamilyTag::Liouville { delta, stage: n })?;
            Ok(operator_bracket(&set, delta, CELL_LEVELS[level])?.lambda)
        };
        let below = |len: &BigUint| -> Result<bool> {
            for level in 0..=max_level {
                let b = lam_of(len, level)?;
                if b.hi < target_hi {
                    return Ok(true);
                }
                if b.lo >= target_hi {
                    return Ok(false);
                }
            }
            Ok(false)
        };
        let one = BigUint::one();
        if !below(&one)? {
            return Err(Error::Construction(format!("stage {n}: even {{m_N}} alone is not certified below 1 − 2^-{n}")));
        }
        // bracket ln(len) between an admissible and an inadmissible value
        let (mut u_lo, mut u_hi) = (0.0f64, ln_big_bracket(&m).hi.max(1.0));
        while below(&big_from_ln_floor(u_hi))? {
            u_lo = u_hi;
            u_hi *= 2.0;
            if u_hi > 1e12 {
                return Err(Error::Construction(format!("stage {n}: block length search diverged")));
            }
        }
        let mut len_lo = big_from_ln_floor(u_lo);
        loop {
            let mid = 0.5 * (u_lo + u_hi);
            let len_mid = big_from_ln_floor(mid);
            let len_hi = big_from_ln_floor(u_hi);
            if len_mid == len_lo || len_mid == len_hi || u_hi - u_lo < 1e-9 * u_hi.max(1.0) {
                // finish exactly when the lengths are small integers
                if let (Some(a), Some(b)) = (len_lo.to_u64(), len_hi.to_u64()) {
                    let (mut a, mut b) = (a, b);
                    while b - a > 1 {
                        let c = a + (b - a) / 2;
                        if below(&BigUint::from(c))? {
                            a = c;
                        } else {
                            b = c;
                        }
                    }
                    len_lo = BigUint::from(a);
                }
                break;
            }
            if below(&len_mid)? {
                u_lo = mid;
                len_lo = len_mid;
            } else {
                u_hi = mid;
            }
        }
        let k = &m + &len_lo - 1u32;
        let mut lam = lam_of(&len_lo, 0)?;
        for level in 1..=max_level {
            lam = lam.intersect(&lam_of(&len_lo, level)?).unwrap_or(lam);
        }
        let window_ok = lam.lo >= target_lo && lam.hi < target_hi;
        audit.push(&stage, format!("K=2^{:.6}", ln_big_bracket(&k).mid() / std::f64::consts::LN_2), lam.lo, lam.hi, if window_ok { "stage-complete" } else { "window-failed" }, CELL_LEVELS[max_level]);
        blocks.push(Block { start: m.clone(), end: k.clone() });
        infos.push(LiouvilleStage {
            stage: n,
            log2_m: ln_big_bracket(&m).mid() / std::f64::consts::LN_2,
            log2_max: ln_big_bracket(&k).mid() / std::f64::consts::LN_2,
            gap_lhs,
            gap_rhs: rhs.hi,
            gap_ok,
            kz_value: kz_value(&m),
            kz_cap: cap,
            lambda: lam,
            window: (target_lo, target_hi),
            window_ok,
            m,
            max: k.clone(),
        });
        big_m = k;
        if !window_ok {
            break;
        }
    }
    let completed = infos.iter().filter(|s| s.window_ok).count();
    let set = IndexSet::from_parts(vec![], blocks, None, FamilyTag::Liouville { delta, stage: completed })?;
    Ok(Construction { set, audit, straddles: 0, details: ConstructionDetails::Liouville { stages: infos } })
}

/// Exceptional sets of `I_- ⊂_* I ⊂_* I_+ ∪ I_-` on `[1, bound]`:
/// elements of `I_-` missing from `I`, and elements of `I` outside `I_+ ∪ I_-`.
pub fn star_inclusions(set: &IndexSet, delta: f64, bound: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    let plus = AffineI0::new(delta, 2, 2)?;
    let minus = AffineI0::new(delta, 2, 1)?;
    let missing = minus.elements_in(1, bound).into_iter().filter(|&v| !set.contains_u64(v)).collect();
    let outside = set
        .elements_upto(bound)
        .into_iter()
        .filter(|&v| {
            let b = BigUint::from(v);
            !plus.contains(&b) && !minus.contains(&b)
        })
        .collect();
    Ok((missing, outside))
}
