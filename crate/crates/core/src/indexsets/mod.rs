//! Digit alphabets `I ⊂ ℕ`: explicit finite sets, contiguous big-integer
//! blocks and rule-based infinite tails, plus the special constructions and
//! Ahlfors-regularity checkers.

pub mod audit;
pub mod checks;
pub mod constructions;
pub mod rules;

pub use audit::{AuditLog, AuditRecord};
pub use checks::{
    check_c1, check_c2_gap, check_c3_tail, check_lower_b, check_upper_b, regularity_report, CheckConfig, CheckFragment,
    Criterion, RegularityReport, Verdict,
};
pub use constructions::{
    build_i_delta, build_liouville_set, build_r, make_full, make_geometric, make_i0, make_i_minus, make_i_plus,
    star_inclusions, Construction, ConstructionBudget, ConstructionDetails, LiouvilleStage,
};
pub use rules::{AffineI0, Full, Geometric, LazyRule};

use crate::bracket::{Bracket, DirectedSum};
use crate::contfrac::{ln_big, ln_big_bracket, Digit};
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rules::{big_bracket, int_bracket, pow_neg, rand_below};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyTag {
    Full,
    Finite,
    Geometric { a: u64 },
    I0 { delta: f64 },
    Liouville { delta: f64, stage: usize },
    Combined { delta: f64 },
    Custom,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::Full => write!(f, "full"),
            FamilyTag::Finite => write!(f, "finite"),
            FamilyTag::Geometric { a } => write!(f, "geometric({a})"),
            FamilyTag::I0 { delta } => write!(f, "i0({delta})"),
            FamilyTag::Liouville { delta, stage } => write!(f, "liouville({delta}, stage {stage})"),
            FamilyTag::Combined { delta } => write!(f, "combined({delta})"),
            FamilyTag::Custom => write!(f, "custom"),
        }
    }
}

/// The contiguous run `start..=end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: BigUint,
    pub end: BigUint,
}

impl Block {
    pub fn len(&self) -> BigUint {
        &self.end - &self.start + 1u32
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    /// `Σ_{i ∈ block} (i + x)^{-s}`, with `x` ranging over `[x_lo, x_hi] ⊂ [0,1]`.
    pub fn power_sum(&self, s: f64, x_lo: f64, x_hi: f64) -> Bracket {
        if self.end.bits() < 1000 {
            let (a, b) = (big_bracket(&self.start), big_bracket(&self.end));
            let hi = rules::convex_power_sum(a, Some(b), s, x_lo);
            let lo = rules::convex_power_sum(a, Some(b), s, x_hi);
            let crude = self.log_domain_sum(s);
            if let Some(tight) = Bracket::new(lo.lo, hi.hi).intersect(&crude) {
                return tight;
            }
            return crude;
        }
        self.log_domain_sum(s)
    }

    fn log_domain_sum(&self, s: f64) -> Bracket {
        // every term lies in [(end+1)^{-s}, start^{-s}]
        let ln_n = ln_big_bracket(&self.len());
        let ln_lo = ln_big_bracket(&self.start);
        let ln_hi = ln_big_bracket(&(&self.end + 1u32));
        let hi = ln_n.sub(ln_lo.scale(s)).exp();
        let lo = ln_n.sub(ln_hi.scale(s)).exp();
        Bracket::new(lo.lo, hi.hi)
    }

    /// Element drawn with probability proportional to `i^{-s}`.
    pub fn sample<R: Rng + ?Sized>(&self, s: f64, rng: &mut R) -> Digit {
        let n = self.len();
        let ln_a = ln_big(&self.start);
        let ln_b = ln_big(&self.end);
        if s * (ln_b - ln_a) <= 2f64.ln() {
            // uniform proposal, acceptance (start/i)^s >= 1/2
            loop {
                let i = &self.start + rand_below(rng, &n);
                let acc = (-s * (ln_big(&i) - ln_a)).exp();
                if rng.gen::<f64>() <= acc {
                    return Digit::from_big(i);
                }
            }
        }
        // split into halves by weight and recurse
        let mid = (&self.start + &self.end) >> 1u32;
        let left = Block { start: self.start.clone(), end: mid.clone() };
        let right = Block { start: mid + 1u32, end: self.end.clone() };
        let wl = left.power_sum(s, 0.0, 0.0).mid();
        let wr = right.power_sum(s, 0.0, 0.0).mid();
        if rng.gen::<f64>() * (wl + wr) < wl {
            left.sample(s, rng)
        } else {
            right.sample(s, rng)
        }
    }
}

/// Elements of `rule` strictly greater than `after`.
#[derive(Clone, Debug)]
pub struct Tail {
    pub after: u64,
    pub rule: Arc<dyn LazyRule>,
}

/// A digit alphabet.
#[derive(Clone, Debug)]
pub struct IndexSet {
    head: Vec<u64>,
    blocks: Vec<Block>,
    tail: Option<Tail>,
    family: FamilyTag,
}

/// Part of an alphabet beyond an explicit cutoff, handled in bulk.
#[derive(Clone, Debug)]
pub enum BulkPart {
    List(Vec<u64>),
    Block(Block),
    Tail(Tail),
}

impl BulkPart {
    /// Smallest element.
    pub fn min(&self) -> BigUint {
        match self {
            BulkPart::List(v) => BigUint::from(v[0]),
            BulkPart::Block(b) => b.start.clone(),
            BulkPart::Tail(t) => t.rule.next_at_or_after(t.after + 1).unwrap_or_else(BigUint::zero),
        }
    }

    /// `Σ (i + x)^{-s}` over the part, for `x ∈ [x_lo, x_hi]`.
    pub fn power_sum(&self, s: f64, x_lo: f64, x_hi: f64) -> Bracket {
        match self {
            BulkPart::List(v) => {
                let mut lo = DirectedSum::default();
                let mut hi = DirectedSum::default();
                for &i in v {
                    let fi = int_bracket(i);
                    hi.add(pow_neg(fi.add(Bracket::point(x_lo)), s));
                    lo.add(pow_neg(fi.add(Bracket::point(x_hi)), s));
                }
                Bracket::new(lo.bracket().lo, hi.bracket().hi)
            }
            BulkPart::Block(b) => b.power_sum(s, x_lo, x_hi),
            BulkPart::Tail(t) => {
                let hi = t.rule.shifted_tail_sum(t.after, s, x_lo);
                let lo = t.rule.shifted_tail_sum(t.after, s, x_hi);
                Bracket::new(lo.lo, hi.hi)
            }
        }
    }

    pub fn sample(&self, s: f64, rng: &mut dyn rand::RngCore) -> Result<Digit> {
        match self {
            BulkPart::List(v) => {
                let w: Vec<f64> = v.iter().map(|&i| (i as f64).powf(-s)).collect();
                let total: f64 = w.iter().sum();
                let mut u = rng.gen::<f64>() * total;
                for (k, wk) in w.iter().enumerate() {
                    if u < *wk {
                        return Ok(Digit::Small(v[k]));
                    }
                    u -= wk;
                }
                Ok(Digit::Small(*v.last().unwrap()))
            }
            BulkPart::Block(b) => Ok(b.sample(s, rng)),
            BulkPart::Tail(t) => t.rule.sample_above(t.after, s, rng),
        }
    }
}

/// An alphabet cut at `T`: explicit digits `<= T` and bulk parts above.
#[derive(Clone, Debug)]
pub struct Split {
    pub cutoff: u64,
    pub explicit: Vec<u64>,
    pub bulk: Vec<BulkPart>,
}

impl Split {
    /// `Σ_{i > cutoff} (i + x)^{-s}` for `x ∈ [x_lo, x_hi]`.
    pub fn bulk_sum(&self, s: f64, x_lo: f64, x_hi: f64) -> Bracket {
        let mut acc = DirectedSum::default();
        for p in &self.bulk {
            acc.add(p.power_sum(s, x_lo, x_hi));
        }
        acc.bracket()
    }
}

impl IndexSet {
    pub fn finite(mut elems: Vec<u64>) -> Result<Self> {
        elems.sort_unstable();
        elems.dedup();
        if elems.first() == Some(&0) {
            return Err(Error::InvalidDigit("0".into()));
        }
        if elems.is_empty() {
            return Err(Error::Domain("alphabet must be nonempty".into()));
        }
        Ok(IndexSet { head: elems, blocks: vec![], tail: None, family: FamilyTag::Finite })
    }

    /// General constructor. Requires head < blocks < tail in order.
    pub fn from_parts(head: Vec<u64>, blocks: Vec<Block>, tail: Option<Tail>, family: FamilyTag) -> Result<Self> {
        if head.windows(2).any(|w| w[0] >= w[1]) || head.first() == Some(&0) {
            return Err(Error::Domain("head must be strictly increasing positive integers".into()));
        }
        let mut last = head.last().map(|&v| BigUint::from(v)).unwrap_or_else(BigUint::zero);
        for b in &blocks {
            if b.is_empty() || b.start <= last {
                return Err(Error::Domain("blocks must be nonempty, increasing and above the head".into()));
            }
            last = b.end.clone();
        }
        if let Some(t) = &tail {
            if BigUint::from(t.after) < last {
                return Err(Error::Domain("tail must start above all explicit elements".into()));
            }
        }
        if head.is_empty() && blocks.is_empty() && tail.is_none() {
            return Err(Error::Domain("alphabet must be nonempty".into()));
        }
        Ok(IndexSet { head, blocks, tail, family })
    }

    pub fn from_rule(rule: Arc<dyn LazyRule>, family: FamilyTag) -> Self {
        IndexSet { head: vec![], blocks: vec![], tail: Some(Tail { after: 0, rule }), family }
    }

    pub fn family(&self) -> &FamilyTag {
        &self.family
    }

    pub fn with_family(mut self, family: FamilyTag) -> Self {
        self.family = family;
        self
    }

    pub fn head(&self) -> &[u64] {
        &self.head
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// Number of elements for finite sets.
    pub fn cardinality(&self) -> Option<BigUint> {
        if self.tail.is_some() {
            return None;
        }
        let mut n = BigUint::from(self.head.len());
        for b in &self.blocks {
            n += b.len();
        }
        Some(n)
    }

    pub fn max(&self) -> Option<BigUint> {
        if self.tail.is_some() {
            return None;
        }
        match self.blocks.last() {
            Some(b) => Some(b.end.clone()),
            None => self.head.last().map(|&v| BigUint::from(v)),
        }
    }

    pub fn min(&self) -> BigUint {
        self.next_at_or_after(&BigUint::one()).expect("nonempty")
    }

    pub fn contains(&self, n: &BigUint) -> bool {
        if let Some(v) = n.to_u64() {
            if self.head.binary_search(&v).is_ok() {
                return true;
            }
        }
        if self.blocks.iter().any(|b| &b.start <= n && n <= &b.end) {
            return true;
        }
        match &self.tail {
            Some(t) => n > &BigUint::from(t.after) && t.rule.contains(n),
            None => false,
        }
    }

    pub fn contains_u64(&self, n: u64) -> bool {
        self.contains(&BigUint::from(n))
    }

    pub fn contains_digit(&self, d: &Digit) -> bool {
        match d {
            Digit::Small(v) => self.contains_u64(*v),
            Digit::Big(b) => self.contains(b),
        }
    }

    /// Least element `>= k`.
    pub fn next_at_or_after(&self, k: &BigUint) -> Option<BigUint> {
        if let Some(kv) = k.to_u64() {
            let pos = self.head.partition_point(|&h| h < kv);
            if pos < self.head.len() {
                return Some(BigUint::from(self.head[pos]));
            }
        }
        for b in &self.blocks {
            if &b.end >= k {
                return Some(if &b.start >= k { b.start.clone() } else { k.clone() });
            }
        }
        let t = self.tail.as_ref()?;
        let from = k.max(&BigUint::from(t.after + 1)).clone();
        let from = from.to_u64()?;
        t.rule.next_at_or_after(from)
    }

    /// Number of elements in `[lo, hi]` (both within 64 bits).
    pub fn count_in(&self, lo: u64, hi: u64) -> u64 {
        if hi < lo {
            return 0;
        }
        let a = self.head.partition_point(|&h| h < lo);
        let b = self.head.partition_point(|&h| h <= hi);
        let mut n = (b - a) as u64;
        let (lo_b, hi_b) = (BigUint::from(lo), BigUint::from(hi));
        for blk in &self.blocks {
            let s = (&blk.start).max(&lo_b);
            let e = (&blk.end).min(&hi_b);
            if s <= e {
                n += (e - s + 1u32).to_u64().unwrap_or(u64::MAX);
            }
        }
        if let Some(t) = &self.tail {
            let s = lo.max(t.after + 1);
            if s <= hi {
                n += t.rule.count_in(s, hi);
            }
        }
        n
    }

    /// All elements `<= bound`.
    pub fn elements_upto(&self, bound: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self.head.iter().copied().filter(|&h| h <= bound).collect();
        let bb = BigUint::from(bound);
        for blk in &self.blocks {
            if blk.start > bb {
                break;
            }
            let s = blk.start.to_u64().unwrap();
            let e = (&blk.end).min(&bb).to_u64().unwrap();
            out.extend(s..=e);
        }
        if let Some(t) = &self.tail {
            if t.after < bound {
                out.extend(t.rule.elements_in(t.after + 1, bound));
            }
        }
        out
    }

    /// The first `count` elements (fewer for small finite sets).
    pub fn first_n(&self, count: usize) -> Vec<Digit> {
        let mut out = Vec::with_capacity(count.min(1 << 20));
        let mut k = BigUint::one();
        while out.len() < count {
            match self.next_at_or_after(&k) {
                Some(e) => {
                    k = &e + 1u32;
                    out.push(Digit::from_big(e));
                }
                None => break,
            }
        }
        out
    }

    /// `Σ_{i ∈ I, i > k} i^{-s}`.
    pub fn tail_sum(&self, k: u64, s: f64) -> Bracket {
        let mut parts = Vec::new();
        let rest: Vec<u64> = self.head.iter().copied().filter(|&h| h > k).collect();
        if !rest.is_empty() {
            parts.push(BulkPart::List(rest));
        }
        let kb = BigUint::from(k);
        for blk in &self.blocks {
            if blk.end > kb {
                let start = if blk.start > kb { blk.start.clone() } else { &kb + 1u32 };
                parts.push(BulkPart::Block(Block { start, end: blk.end.clone() }));
            }
        }
        if let Some(t) = &self.tail {
            parts.push(BulkPart::Tail(Tail { after: t.after.max(k), rule: t.rule.clone() }));
        }
        Split { cutoff: k, explicit: vec![], bulk: parts }.bulk_sum(s, 0.0, 0.0)
    }

    /// `Σ_{i ∈ I} i^{-s}`.
    pub fn power_sum(&self, s: f64) -> Bracket {
        self.tail_sum(0, s)
    }

    /// Cut the alphabet at `cutoff`.
    pub fn split(&self, cutoff: u64) -> Split {
        let explicit: Vec<u64> = self.head.iter().copied().filter(|&h| h <= cutoff).collect();
        let mut explicit = explicit;
        let mut bulk = Vec::new();
        let rest: Vec<u64> = self.head.iter().copied().filter(|&h| h > cutoff).collect();
        if !rest.is_empty() {
            bulk.push(BulkPart::List(rest));
        }
        let cb = BigUint::from(cutoff);
        for blk in &self.blocks {
            if blk.end <= cb {
                explicit.extend(blk.start.to_u64().unwrap()..=blk.end.to_u64().unwrap());
            } else if blk.start <= cb {
                explicit.extend(blk.start.to_u64().unwrap()..=cutoff);
                bulk.push(BulkPart::Block(Block { start: &cb + 1u32, end: blk.end.clone() }));
            } else {
                bulk.push(BulkPart::Block(blk.clone()));
            }
        }
        if let Some(t) = &self.tail {
            if t.after < cutoff {
                explicit.extend(t.rule.elements_in(t.after + 1, cutoff));
                bulk.push(BulkPart::Tail(Tail { after: cutoff, rule: t.rule.clone() }));
            } else {
                bulk.push(BulkPart::Tail(t.clone()));
            }
        }
        Split { cutoff, explicit, bulk }
    }

    /// `I ∪ {n}`.
    pub fn with_element(&self, n: u64) -> Result<IndexSet> {
        if self.contains_u64(n) {
            return Ok(self.clone());
        }
        let mut head = self.head.clone();
        let pos = head.partition_point(|&h| h < n);
        head.insert(pos, n);
        if let Some(b) = self.blocks.first() {
            if b.start <= BigUint::from(n) {
                return Err(Error::Unsupported("inserting below an existing block".into()));
            }
        }
        let mut tail = self.tail.clone();
        if let Some(t) = &mut tail {
            if n > t.after {
                // keep the tail strictly above the head
                let extra = t.rule.elements_in(t.after + 1, n);
                for e in extra {
                    let p = head.partition_point(|&h| h < e);
                    if head.get(p) != Some(&e) {
                        head.insert(p, e);
                    }
                }
                t.after = n;
            }
        }
        IndexSet::from_parts(head, self.blocks.clone(), tail, self.family.clone())
    }

    /// `I ∪ {start..=end}` for a block above every current element.
    pub fn with_block(&self, block: Block) -> Result<IndexSet> {
        let mut blocks = self.blocks.clone();
        blocks.push(block);
        IndexSet::from_parts(self.head.clone(), blocks, self.tail.clone(), self.family.clone())
    }

    /// The finite set of the first `count` elements.
    pub fn truncate_count(&self, count: usize) -> Result<IndexSet> {
        let elems = self.first_n(count);
        let mut head = Vec::new();
        for d in elems {
            match d {
                Digit::Small(v) => head.push(v),
                Digit::Big(_) => return Err(Error::Unsupported("truncation beyond 64-bit elements".into())),
            }
        }
        IndexSet::finite(head)
    }

    /// `I ∩ [1, bound]`.
    pub fn truncate_at(&self, bound: u64) -> Result<IndexSet> {
        IndexSet::finite(self.elements_upto(bound))
    }

    /// θ_I from the family structure.
    pub fn theta_exact(&self) -> Option<f64> {
        match &self.tail {
            None => Some(0.0),
            Some(t) => Some(t.rule.theta()),
        }
    }

    /// A short human-readable description.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.head.is_empty() {
            if self.head.len() <= 12 {
                parts.push(format!("{:?}", self.head));
            } else {
                parts.push(format!(
                    "{} explicit elements in [{}, {}]",
                    self.head.len(),
                    self.head[0],
                    self.head.last().unwrap()
                ));
            }
        }
        for b in &self.blocks {
            parts.push(format!(
                "block [{}, {}]",
                Digit::from_big(b.start.clone()),
                Digit::from_big(b.end.clone())
            ));
        }
        if let Some(t) = &self.tail {
            parts.push(format!("{} above {}", t.rule.describe(), t.after));
        }
        format!("{}: {}", self.family, parts.join(" ∪ "))
    }

    /// JSON description (element lists are truncated to `max_listed`).
    pub fn to_json(&self, max_listed: usize) -> serde_json::Value {
        let shown: Vec<serde_json::Value> = self
            .first_n(max_listed)
            .iter()
            .map(|d| serde_json::to_value(d).unwrap())
            .collect();
        let blocks: Vec<serde_json::Value> = self
            .blocks
            .iter()
            .map(|b| {
                serde_json::json!({
                    "start_log2": ln_big(&b.start) / std::f64::consts::LN_2,
                    "end_log2": ln_big(&b.end) / std::f64::consts::LN_2,
                    "length_log2": ln_big(&b.len()) / std::f64::consts::LN_2,
                    "start": if b.start.bits() <= 128 { serde_json::json!(b.start.to_string()) } else { serde_json::Value::Null },
                    "end": if b.end.bits() <= 128 { serde_json::json!(b.end.to_string()) } else { serde_json::Value::Null },
                })
            })
            .collect();
        serde_json::json!({
            "family": self.family,
            "description": self.describe(),
            "finite": self.is_finite(),
            "explicit_count": self.head.len(),
            "elements": shown,
            "blocks": blocks,
            "tail": self.tail.as_ref().map(|t| serde_json::json!({"after": t.after, "rule": t.rule.describe()})),
        })
    }
}

/// Parses an alphabet file: one positive integer per line, ascending,
/// `#` starts a comment.
pub fn parse_alphabet_file(text: &str) -> Result<IndexSet> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let v: u64 = body
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: not a positive integer: {body:?}", ln + 1)))?;
        if v == 0 {
            return Err(Error::Parse(format!("line {}: digits must be >= 1", ln + 1)));
        }
        if let Some(&last) = out.last() {
            if v <= last {
                return Err(Error::Parse(format!("line {}: values must be strictly ascending", ln + 1)));
            }
        }
        out.push(v);
    }
    IndexSet::finite(out)
}

/// Parses `"1,2,5"` or `"1-10,15"` into a finite set, or `full` into ℕ.
pub fn parse_set(spec: &str) -> Result<IndexSet> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("full") || spec == "N" {
        return Ok(make_full());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((a, b)) = part.split_once('-') {
            let a: u64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad range {part:?}")))?;
            let b: u64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad range {part:?}")))?;
            if b < a || b - a > 10_000_000 {
                return Err(Error::Parse(format!("bad range {part:?}")));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| Error::Parse(format!("not a positive integer: {part:?}")))?);
        }
    }
    if out.contains(&0) {
        return Err(Error::InvalidDigit("0".into()));
    }
    IndexSet::finite(out)
}

/// Parses `geometric:2`, `i0:0.5`, `iplus:0.7`, `iminus:0.7`, `full`.
pub fn parse_family(spec: &str) -> Result<IndexSet> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match name.trim() {
        "full" => Ok(make_full()),
        "geometric" => {
            let a = arg.trim().parse().map_err(|_| Error::Parse(format!("bad ratio in {spec:?}")))?;
            make_geometric(a)
        }
        "i0" | "iplus" | "iminus" => {
            let d: f64 = arg.trim().parse().map_err(|_| Error::Parse(format!("bad δ in {spec:?}")))?;
            let (scale, base) = match name.trim() {
                "i0" => (1, 1),
                "iplus" => (2, 2),
                _ => (2, 1),
            };
            let rule = AffineI0::new(d, scale, base)?;
            Ok(IndexSet::from_rule(Arc::new(rule), FamilyTag::I0 { delta: d }))
        }
        other => Err(Error::Parse(format!("unknown family {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_sets_and_membership() {
        let s = parse_set("1, 2, 5-7").unwrap();
        assert_eq!(s.elements_upto(100), vec![1, 2, 5, 6, 7]);
        assert!(s.contains_u64(6));
        assert!(!s.contains_u64(3));
        assert_eq!(s.max(), Some(BigUint::from(7u32)));
        assert!(parse_set("0,1").is_err());
    }

    #[test]
    fn alphabet_file_format() {
        let s = parse_alphabet_file("# header\n1\n3 # three\n\n10\n").unwrap();
        assert_eq!(s.head(), &[1, 3, 10]);
        assert!(parse_alphabet_file("3\n2\n").is_err());
        assert!(parse_alphabet_file("x\n").is_err());
    }

    #[test]
    fn split_and_tail_sums_agree() {
        let full = make_full();
        let sp = full.split(10);
        assert_eq!(sp.explicit, (1..=10).collect::<Vec<_>>());
        let direct = full.tail_sum(10, 2.0);
        let z: f64 = std::f64::consts::PI.powi(2) / 6.0 - (1..=10).map(|i| 1.0 / (i * i) as f64).sum::<f64>();
        assert!(direct.contains(z) || (direct.mid() - z).abs() < 1e-14);
    }

    #[test]
    fn with_element_keeps_tail_above_head() {
        let i = parse_family("iminus:0.7").unwrap();
        let j = i.with_element(4).unwrap();
        assert!(j.contains_u64(4));
        assert!(j.contains_u64(1));
        assert_eq!(j.count_in(1, 1000), i.count_in(1, 1000) + 1);
    }

    #[test]
    fn block_sums_bracket_brute_force() {
        let b = Block { start: BigUint::from(100u32), end: BigUint::from(5000u32) };
        let brute: f64 = (100..=5000).map(|i| (i as f64 + 0.25).powf(-0.8)).sum();
        assert!(b.power_sum(0.8, 0.25, 0.25).contains(brute));
        let big = Block { start: BigUint::one() << 200u32, end: (BigUint::one() << 200u32) + (BigUint::one() << 150u32) };
        let w = big.power_sum(0.8, 0.0, 1.0);
        let expect = (150.0 - 0.8 * 200.0) * std::f64::consts::LN_2;
        assert!((w.mid().ln() - expect).abs() < 1e-9);
    }
}
