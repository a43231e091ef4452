//! Rule-based infinite alphabets: all of ℕ, geometric progressions and the
//! affine images of the subset-sum set `I_0`.

use crate::bracket::{Bracket, DirectedSum};
use crate::contfrac::Digit;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

/// `b^{-s}` for a positive bracket `b`.
pub fn pow_neg(b: Bracket, s: f64) -> Bracket {
    if s == 0.0 {
        return Bracket::ONE;
    }
    b.ln().scale(-s).exp()
}

/// Integer `n` as a bracket (exact below 2^53).
pub fn int_bracket(n: u64) -> Bracket {
    let f = n as f64;
    if n < (1u64 << 53) {
        Bracket::point(f)
    } else {
        Bracket::around(f, 2)
    }
}

pub fn big_bracket(n: &BigUint) -> Bracket {
    match n.to_u64() {
        Some(v) => int_bracket(v),
        None => {
            let f = n.to_f64().unwrap_or(f64::INFINITY);
            if f.is_finite() {
                Bracket::around(f, 2)
            } else {
                Bracket::new(f64::MAX, f64::INFINITY)
            }
        }
    }
}

/// Convex-sum bounds for `Σ_{i=a}^{b} (i+x)^{-s}` with `s > 0`:
/// trapezoid below, midpoint above. `b = None` means `b = ∞` (needs `s > 1`).
pub fn convex_power_sum(a: Bracket, b: Option<Bracket>, s: f64, x: f64) -> Bracket {
    let fa = a.add(Bracket::point(x));
    let int = |lo: Bracket, hi: Option<Bracket>| -> Bracket {
        // ∫_lo^hi u^{-s} du
        if (s - 1.0).abs() < 1e-300 {
            match hi {
                Some(h) => h.ln().sub(lo.ln()),
                None => Bracket::new(f64::INFINITY, f64::INFINITY),
            }
        } else {
            let e = 1.0 - s;
            let den = Bracket::point(e);
            let l = lo.ln().scale(e).exp();
            match hi {
                Some(h) => h.ln().scale(e).exp().sub(l).div_signed(den),
                None => {
                    if s <= 1.0 {
                        Bracket::new(f64::INFINITY, f64::INFINITY)
                    } else {
                        l.div(Bracket::point(s - 1.0))
                    }
                }
            }
        }
    };
    let half = Bracket::point(0.5);
    match b {
        Some(b) => {
            if b.hi < a.lo {
                return Bracket::ZERO;
            }
            let fb = b.add(Bracket::point(x));
            let lo = int(fa, Some(fb)).add(pow_neg(fa, s).add(pow_neg(fb, s)).mul(half));
            let hi = int(fa.sub(half), Some(fb.add(half)));
            Bracket::new(lo.lo, hi.hi.max(lo.lo))
        }
        None => {
            if s <= 1.0 {
                return Bracket::new(f64::INFINITY, f64::INFINITY);
            }
            let lo = int(fa, None).add(pow_neg(fa, s).mul(half));
            let hi = int(fa.sub(half), None);
            let convex = Bracket::new(lo.lo, hi.hi.max(lo.lo));
            // Euler-Maclaurin through the f' term; u^{-s} is completely
            // monotone so the remainder is at most the f''' term.
            let em = int(fa, None)
                .add(pow_neg(fa, s).mul(half))
                .add(pow_neg(fa, s + 1.0).scale(s / 12.0));
            let r = pow_neg(fa, s + 3.0).scale(s * (s + 1.0) * (s + 2.0) / 720.0).hi;
            let em = Bracket::new(em.lo - r, em.hi + r);
            convex.intersect(&em).unwrap_or(convex)
        }
    }
}

impl Bracket {
    /// Division where the divisor has a definite sign.
    pub fn div_signed(self, o: Bracket) -> Bracket {
        if o.lo > 0.0 {
            self.div(o)
        } else {
            self.neg().div(o.neg())
        }
    }
}

/// Builds a big integer close to `e^{ln_u}` with uniformly random low bits.
pub fn big_from_ln<R: Rng + ?Sized>(ln_u: f64, rng: &mut R) -> BigUint {
    let log2 = ln_u / std::f64::consts::LN_2;
    if log2 < 60.0 {
        return BigUint::from(ln_u.exp().floor().max(1.0) as u64);
    }
    let shift = (log2 - 52.0).floor();
    let mant = (log2 - shift).exp2();
    let top = BigUint::from(mant as u64);
    let shift = shift as u64;
    let low = rand_bits(rng, shift);
    (top << shift) + low
}

fn rand_bits<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    let words = bits.div_ceil(32) as usize;
    let mut v: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    let extra = (words as u64) * 32 - bits;
    if extra > 0 {
        if let Some(last) = v.last_mut() {
            *last >>= extra;
        }
    }
    BigUint::new(v)
}

/// Uniform big integer in `[0, n)`.
pub fn rand_below<R: Rng + ?Sized>(rng: &mut R, n: &BigUint) -> BigUint {
    if let Some(v) = n.to_u64() {
        return BigUint::from(rng.gen_range(0..v));
    }
    let bits = n.bits();
    loop {
        let c = rand_bits(rng, bits);
        if &c < n {
            return c;
        }
    }
}

/// An infinite rule-defined alphabet.
pub trait LazyRule: Send + Sync + fmt::Debug {
    fn contains(&self, n: &BigUint) -> bool;
    /// Least element `>= k`.
    fn next_at_or_after(&self, k: u64) -> Option<BigUint>;
    /// Number of elements in `[lo, hi]`.
    fn count_in(&self, lo: u64, hi: u64) -> u64;
    /// Elements in `[lo, hi]`, ascending.
    fn elements_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut k = lo.max(1);
        while k <= hi {
            match self.next_at_or_after(k).and_then(|b| b.to_u64()) {
                Some(e) if e <= hi => {
                    out.push(e);
                    if e == u64::MAX {
                        break;
                    }
                    k = e + 1;
                }
                _ => break,
            }
        }
        out
    }
    /// `Σ_{i > k} i^{-s}`; `[∞, ∞]` when the series diverges.
    fn tail_sum(&self, k: u64, s: f64) -> Bracket;
    /// `Σ_{i > k} (i+x)^{-s}` for `x ∈ [0, 1]`.
    fn shifted_tail_sum(&self, k: u64, s: f64, x: f64) -> Bracket {
        let t = self.tail_sum(k, s);
        if x == 0.0 || !t.is_finite() {
            return t;
        }
        let first = self.next_at_or_after(k.saturating_add(1)).map(|b| big_bracket(&b));
        let Some(first) = first else { return Bracket::ZERO };
        let ratio = pow_neg(Bracket::ONE.add(Bracket::point(x).div(first)), s);
        Bracket::new((t.lo * ratio.lo).next_down().max(0.0), t.hi)
    }
    /// An element `> k` drawn with probability proportional to `i^{-s}`.
    fn sample_above(&self, k: u64, s: f64, rng: &mut dyn rand::RngCore) -> Result<Digit>;
    /// Exponent of convergence of `Σ i^{-2t}` expressed in `t` (θ).
    fn theta(&self) -> f64;
    fn describe(&self) -> String;
}

/// All positive integers.
#[derive(Clone, Debug)]
pub struct Full;

const FULL_EXPLICIT: u64 = 256;

impl LazyRule for Full {
    fn contains(&self, n: &BigUint) -> bool {
        !n.is_zero()
    }
    fn next_at_or_after(&self, k: u64) -> Option<BigUint> {
        Some(BigUint::from(k.max(1)))
    }
    fn count_in(&self, lo: u64, hi: u64) -> u64 {
        let lo = lo.max(1);
        if hi < lo {
            0
        } else {
            hi - lo + 1
        }
    }
    fn elements_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        (lo.max(1)..=hi).collect()
    }
    fn tail_sum(&self, k: u64, s: f64) -> Bracket {
        self.shifted_tail_sum(k, s, 0.0)
    }
    fn shifted_tail_sum(&self, k: u64, s: f64, x: f64) -> Bracket {
        if s <= 1.0 {
            return Bracket::new(f64::INFINITY, f64::INFINITY);
        }
        let mut acc = DirectedSum::default();
        let mut start = k + 1;
        while start <= FULL_EXPLICIT {
            acc.add(pow_neg(Bracket::point(start as f64).add(Bracket::point(x)), s));
            start += 1;
        }
        acc.add(convex_power_sum(int_bracket(start), None, s, x));
        acc.bracket()
    }
    fn sample_above(&self, k: u64, s: f64, rng: &mut dyn rand::RngCore) -> Result<Digit> {
        if s <= 1.0 {
            return Err(Error::Domain(format!("Σ i^-{s} diverges; cannot sample ℕ tail")));
        }
        let a = k as f64 + 0.5;
        loop {
            // Pareto proposal on [k+1/2, ∞), rounded to the nearest integer.
            let u: f64 = 1.0 - rng.gen::<f64>();
            let ln_v = a.ln() - u.ln() / (s - 1.0);
            if ln_v > 60.0 * std::f64::consts::LN_2 {
                return Ok(Digit::from_big(big_from_ln(ln_v, rng)));
            }
            let v = ln_v.exp();
            let i = v.round().max((k + 1) as f64);
            let fi = i.powf(-s);
            let cell = ((i - 0.5).powf(1.0 - s) - (i + 0.5).powf(1.0 - s)) / (s - 1.0);
            if rng.gen::<f64>() * cell <= fi {
                return Ok(Digit::Small(i as u64));
            }
        }
    }
    fn theta(&self) -> f64 {
        0.5
    }
    fn describe(&self) -> String {
        "all positive integers".into()
    }
}

/// `{a, a², a³, …}`.
#[derive(Clone, Debug)]
pub struct Geometric {
    pub a: u64,
}

impl Geometric {
    pub fn new(a: u64) -> Result<Self> {
        if a < 2 {
            return Err(Error::Domain(format!("geometric ratio must be >= 2, got {a}")));
        }
        Ok(Geometric { a })
    }

    /// Smallest exponent `j >= 1` with `a^j > k`.
    fn first_exp_above(&self, k: u64) -> u32 {
        let mut j = 1u32;
        let mut p = self.a as u128;
        while p <= k as u128 {
            p *= self.a as u128;
            j += 1;
        }
        j
    }
}

impl LazyRule for Geometric {
    fn contains(&self, n: &BigUint) -> bool {
        if n <= &BigUint::one() {
            return false;
        }
        let mut m = n.clone();
        let a = BigUint::from(self.a);
        while m > BigUint::one() {
            if !(&m % &a).is_zero() {
                return false;
            }
            m /= &a;
        }
        true
    }
    fn next_at_or_after(&self, k: u64) -> Option<BigUint> {
        let j = self.first_exp_above(k.saturating_sub(1));
        Some(BigUint::from(self.a).pow(j))
    }
    fn count_in(&self, lo: u64, hi: u64) -> u64 {
        if hi < lo {
            return 0;
        }
        let below_hi = self.first_exp_above(hi) - 1;
        let below_lo = self.first_exp_above(lo.saturating_sub(1)) - 1;
        (below_hi - below_lo) as u64
    }
    fn tail_sum(&self, k: u64, s: f64) -> Bracket {
        if s <= 0.0 {
            return Bracket::new(f64::INFINITY, f64::INFINITY);
        }
        let j0 = self.first_exp_above(k) as f64;
        let r = pow_neg(Bracket::point(self.a as f64), s);
        let first = Bracket::point(self.a as f64).ln().scale(-s * j0).exp();
        first.div(Bracket::ONE.sub(r))
    }
    fn sample_above(&self, k: u64, s: f64, rng: &mut dyn rand::RngCore) -> Result<Digit> {
        if s <= 0.0 {
            return Err(Error::Domain("geometric tail diverges at s <= 0".into()));
        }
        let j0 = self.first_exp_above(k);
        let q = (self.a as f64).powf(-s);
        let u: f64 = 1.0 - rng.gen::<f64>();
        let extra = (u.ln() / q.ln()).floor() as u32;
        Ok(Digit::from_big(BigUint::from(self.a).pow(j0 + extra)))
    }
    fn theta(&self) -> f64 {
        0.0
    }
    fn describe(&self) -> String {
        format!("powers of {}", self.a)
    }
}

/// `{base + scale·σ : σ a finite subset sum of ⌊2^{n/δ}⌋, n >= 1}`.
///
/// `scale = 1, base = 1` is `I_0`; `scale = 2, base = 2` is `2·I_0`;
/// `scale = 2, base = 1` is `2·I_0 − 1`.
#[derive(Clone)]
pub struct AffineI0 {
    pub delta: f64,
    pub scale: u64,
    pub base: u64,
    /// `⌊2^{n/δ}⌋` for `n = 1..=b.len()` while below 2^120.
    b: Vec<u128>,
    /// Same terms, as exact big integers up to ~2^300.
    b_big: Vec<BigUint>,
    rational: Option<(u32, u32)>,
    cache: Arc<Mutex<HashMap<(u64, u64), Bracket>>>,
}

impl fmt::Debug for AffineI0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineI0")
            .field("delta", &self.delta)
            .field("scale", &self.scale)
            .field("base", &self.base)
            .finish()
    }
}

/// Best rational approximation `p/q` with `q <= max_den`, if within `tol`.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as u64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = y - a;
        if frac.abs() < 1e-300 {
            break;
        }
        y = 1.0 / frac;
    }
    ((h1 as f64 / k1 as f64 - x).abs() <= tol && k1 > 0).then_some((h1, k1))
}

impl AffineI0 {
    pub fn new(delta: f64, scale: u64, base: u64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("I_0 needs 0 < δ < 1, got {delta}")));
        }
        let rational = rational_approx(delta, 10_000, 1e-13).map(|(p, q)| (p as u32, q as u32));
        let mut b_big = Vec::new();
        for n in 1u32.. {
            let t = match rational {
                Some((p, q)) => (BigUint::one() << (n as u64 * q as u64)).nth_root(p),
                None => {
                    let e = n as f64 / delta;
                    if e > 4000.0 {
                        break;
                    }
                    let ip = e.floor() as u64;
                    let mant = BigUint::from(((e - e.floor()).exp2() * 2f64.powi(52)) as u64);
                    if ip >= 52 {
                        mant << (ip - 52)
                    } else {
                        mant >> (52 - ip)
                    }
                }
            };
            let done = t.bits() > 300;
            b_big.push(t);
            if done {
                break;
            }
        }
        let b: Vec<u128> = b_big.iter().map_while(|t| t.to_u128().filter(|v| *v < (1u128 << 120))).collect();
        for w in 1..b_big.len() {
            let prefix: BigUint = b_big[..w].iter().sum();
            if prefix >= b_big[w] {
                return Err(Error::Unsupported(format!(
                    "subset sums for δ = {delta} are not super-increasing at n = {}",
                    w + 1
                )));
            }
        }
        Ok(AffineI0 { delta, scale, base, b, b_big, rational, cache: Arc::default() })
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.b_big
    }

    pub fn is_exact(&self) -> bool {
        self.rational.is_some()
    }

    /// Number of subset sums of `b_1..b_m` that are `<= x`.
    fn count_sigma_le(&self, x: u128, m: usize) -> u128 {
        let mut x = x;
        let mut count = 0u128;
        for n in (1..=m).rev() {
            let bn = self.b[n - 1];
            if bn <= x {
                count += 1u128 << (n - 1);
                x -= bn;
            }
        }
        count + 1
    }

    fn sigma_by_index(&self, j: u128) -> Option<u128> {
        let mut s = 0u128;
        let mut j = j;
        let mut n = 0usize;
        while j > 0 {
            if n >= self.b.len() {
                return None;
            }
            if j & 1 == 1 {
                s = s.checked_add(self.b[n])?;
            }
            j >>= 1;
            n += 1;
        }
        Some(s)
    }

    fn element(&self, sigma: u128) -> Option<u128> {
        sigma.checked_mul(self.scale as u128)?.checked_add(self.base as u128)
    }

    fn b_bracket(&self, n: usize) -> Bracket {
        // n is 1-based
        if n <= self.b_big.len() {
            big_bracket(&self.b_big[n - 1])
        } else {
            let e = Bracket::point(n as f64).div(Bracket::point(self.delta));
            let v = e.mul(Bracket::point(2.0).ln()).exp();
            Bracket::new((v.lo - 1.0).max(1.0), v.hi)
        }
    }

    fn prefix_sum_bracket(&self, m: usize) -> Bracket {
        let mut acc = DirectedSum::default();
        for n in 1..=m {
            acc.add(self.b_bracket(n));
        }
        acc.bracket()
    }

    /// `Σ (A + scale·σ)^{-s}` over subset sums σ of `b_1..b_m`, restricted to
    /// values `> k`.
    fn group_sum(&self, a: Bracket, m: usize, s: f64, k: f64, tol: f64, pre: &Prefix, out: &mut DirectedSum) {
        let sc = Bracket::point(self.scale as f64);
        let top = a.add(sc.mul(pre.sum[m]));
        if top.hi <= k {
            return;
        }
        if a.lo > k {
            let g = self.group_enclosure(a, top, m, s, pre);
            // splitting cannot beat the rounding width of a single power
            let p = pow_neg(a, s);
            let floor = 4.0 * p.width() / p.lo + 1e-13;
            if m == 0 || g.width() <= tol.max(floor * g.hi) {
                out.add(g);
                return;
            }
        } else if m == 0 {
            if a.hi > k {
                // ambiguous integer boundary: only possible for huge values
                out.add(Bracket::new(0.0, pow_neg(a, s).hi));
            }
            return;
        }
        self.group_sum(a, m - 1, s, k, tol / 2.0, pre, out);
        let a2 = a.add(sc.mul(self.b_bracket(m)));
        self.group_sum(a2, m - 1, s, k, tol / 2.0, pre, out);
    }

    /// Second-order enclosure of a whole group: with `μ` the mean point and
    /// `V` the variance of the `2^m` points,
    /// `Σ f ∈ 2^m [f(μ) + f''(top)V/2, f(μ) + f''(a)V/2]` since `f''` decreases.
    fn group_enclosure(&self, a: Bracket, top: Bracket, m: usize, s: f64, pre: &Prefix) -> Bracket {
        let count = Bracket::point(2f64.powi(m as i32));
        let simple = Bracket::new(count.mul(pow_neg(top, s)).lo, count.mul(pow_neg(a, s)).hi);
        if m == 0 {
            return pow_neg(a, s);
        }
        let sc = Bracket::point(self.scale as f64);
        let mu = a.add(sc.mul(pre.sum[m]).scale(0.5));
        let var = sc.mul(sc).mul(pre.sq[m]).scale(0.25);
        let c2 = s * (s + 1.0);
        let f2_top = pow_neg(top, s + 2.0).scale(c2);
        let f2_a = pow_neg(a, s + 2.0).scale(c2);
        let base = pow_neg(mu, s);
        let lo = base.add(f2_top.mul(var).scale(0.5)).mul(count);
        let hi = base.add(f2_a.mul(var).scale(0.5)).mul(count);
        Bracket::new(lo.lo, hi.hi).intersect(&simple).unwrap_or(simple)
    }

    fn groups_considered(&self) -> usize {
        self.b_big.len()
    }
}

impl LazyRule for AffineI0 {
    fn contains(&self, n: &BigUint) -> bool {
        let base = BigUint::from(self.base);
        if n < &base {
            return false;
        }
        let d = n - &base;
        let sc = BigUint::from(self.scale);
        if !(&d % &sc).is_zero() {
            return false;
        }
        let mut sigma = d / sc;
        for bn in self.b_big.iter().rev() {
            if bn <= &sigma {
                sigma -= bn;
            }
        }
        sigma.is_zero()
    }

    fn next_at_or_after(&self, k: u64) -> Option<BigUint> {
        if k <= self.base {
            return Some(BigUint::from(self.base));
        }
        let target = (k - self.base).div_ceil(self.scale) as u128;
        let j = self.count_sigma_le(target - 1, self.b.len());
        let sigma = self.sigma_by_index(j)?;
        self.element(sigma).map(BigUint::from)
    }

    fn count_in(&self, lo: u64, hi: u64) -> u64 {
        let count_le = |x: u64| -> u128 {
            if x < self.base {
                return 0;
            }
            let sigma = ((x - self.base) / self.scale) as u128;
            self.count_sigma_le(sigma, self.b.len())
        };
        if hi < lo {
            return 0;
        }
        (count_le(hi) - if lo == 0 { 0 } else { count_le(lo - 1) }) as u64
    }

    fn tail_sum(&self, k: u64, s: f64) -> Bracket {
        if s <= self.delta {
            return Bracket::new(f64::INFINITY, f64::INFINITY);
        }
        if let Some(b) = self.cache.lock().unwrap().get(&(k, s.to_bits())) {
            return *b;
        }
        let out = self.tail_sum_uncached(k, s);
        self.cache.lock().unwrap().insert((k, s.to_bits()), out);
        out
    }

    fn sample_above(&self, k: u64, s: f64, rng: &mut dyn rand::RngCore) -> Result<Digit> {
        if s <= self.delta {
            return Err(Error::Domain(format!("I_0 tail diverges at s = {s} <= δ")));
        }
        // proposal over groups: index 0 is the lone element `base`
        let mut weights = Vec::new();
        let ln_sc = (self.scale as f64).ln();
        let mut total = 0.0;
        let base_w = if self.base > k { (self.base as f64).powf(-s) } else { 0.0 };
        weights.push(base_w);
        total += base_w;
        let mut n = 1usize;
        loop {
            let ln_b = if n <= self.b_big.len() {
                crate::contfrac::ln_big(&self.b_big[n - 1])
            } else {
                n as f64 / self.delta * std::f64::consts::LN_2
            };
            let ln_w = (n as f64 - 1.0) * std::f64::consts::LN_2 - s * (ln_sc + ln_b);
            let w = ln_w.exp();
            weights.push(w);
            total += w;
            if n > 8 && w < 1e-18 * total {
                break;
            }
            if n > 100_000 {
                return Err(Error::Convergence("I_0 tail sampler: group weights decay too slowly".into()));
            }
            n += 1;
        }
        let dist = rand::distributions::WeightedIndex::new(&weights)
            .map_err(|e| Error::Domain(format!("I_0 tail sampler: {e}")))?;
        use rand::distributions::Distribution;
        loop {
            let g = dist.sample(rng);
            if g == 0 {
                return Ok(Digit::Small(self.base));
            }
            let bn = self.b_term_big(g);
            let mut sigma = bn.clone();
            for m in 1..g {
                if rng.gen::<bool>() {
                    sigma += self.b_term_big(m);
                }
            }
            let elem = sigma * BigUint::from(self.scale) + BigUint::from(self.base);
            if let Some(e) = elem.to_u64() {
                if e <= k {
                    continue;
                }
            }
            let top = bn * BigUint::from(self.scale) + BigUint::from(self.base);
            let ratio = (crate::contfrac::ln_big(&top) - crate::contfrac::ln_big(&elem)) * s;
            if rng.gen::<f64>() <= ratio.exp() {
                return Ok(Digit::from_big(elem));
            }
        }
    }

    fn theta(&self) -> f64 {
        self.delta / 2.0
    }

    fn describe(&self) -> String {
        let core = format!("subset sums of floor(2^(n/{}))", self.delta);
        match (self.scale, self.base) {
            (1, 1) => format!("1 + {core}"),
            (2, 2) => format!("2·(1 + {core})"),
            (2, 1) => format!("2·(1 + {core}) − 1"),
            (c, b) => format!("{b} + {c}·{core}"),
        }
    }
}

struct Prefix {
    sum: Vec<Bracket>,
    sq: Vec<Bracket>,
}

impl AffineI0 {
    fn tail_sum_uncached(&self, k: u64, s: f64) -> Bracket {
        let groups = self.groups_considered();
        let pre = Prefix {
            sum: (0..=groups).map(|m| self.prefix_sum_bracket(m)).collect(),
            sq: (0..=groups)
                .map(|m| {
                    let mut acc = DirectedSum::default();
                    for n in 1..=m {
                        let b = self.b_bracket(n);
                        acc.add(b.mul(b));
                    }
                    acc.bracket()
                })
                .collect(),
        };
        let sc = Bracket::point(self.scale as f64);
        let base = Bracket::point(self.base as f64);
        let kf = k as f64;
        let mut out = DirectedSum::default();
        if (self.base as f64) > kf {
            out.add(pow_neg(base, s));
        }
        // rough size of the answer sets the absolute tolerance
        let scale_est = {
            let first = self.next_at_or_after(k + 1).and_then(|b| b.to_f64()).unwrap_or(kf + 1.0);
            first.powf(self.delta - s).max(1e-300)
        };
        let tol = 1e-13 * scale_est;
        for n in 1..=groups {
            let a = base.add(sc.mul(self.b_bracket(n)));
            let g_tol = tol * 0.5f64.powi(n as i32).max(1e-30);
            self.group_sum(a, n - 1, s, kf, g_tol, &pre, &mut out);
        }
        // groups beyond the exact table: 2^{n-1} (scale·b_n)^{-s} with
        // b_n >= 2^{n/δ} − 1, a geometric series in 2^{1 − s/δ}.
        let n0 = groups + 1;
        let r = Bracket::point(2.0).ln().scale(1.0 - s / self.delta).exp();
        let first = Bracket::point(2.0)
            .ln()
            .scale((n0 as f64 - 1.0) - s * n0 as f64 / self.delta)
            .exp()
            .mul(pow_neg(sc, s))
            .mul(pow_neg(Bracket::ONE.sub(pow_neg(self.b_bracket(n0).add(Bracket::ONE), 1.0)), s));
        let rem = first.div(Bracket::ONE.sub(r));
        out.add(Bracket::new(0.0, rem.hi));
        out.bracket()
    }


    fn b_term_big(&self, n: usize) -> BigUint {
        if n <= self.b_big.len() {
            return self.b_big[n - 1].clone();
        }
        match self.rational {
            Some((p, q)) => (BigUint::one() << (n as u64 * q as u64)).nth_root(p),
            None => BigUint::one() << ((n as f64 / self.delta).floor() as u64),
        }
    }
}
