//! Closed intervals of `f64` with outward rounding.
//!
//! Every arithmetic result is widened by at least one ulp in each direction,
//! which encloses the exact result for IEEE-754 `+ - * /`. Transcendental
//! functions (`ln`, `exp`) are padded by a few ulps on top of the libm result,
//! which covers the faithful-rounding error of the platform libm.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

#[inline]
fn down_n(mut x: f64, n: usize) -> f64 {
    for _ in 0..n {
        x = down(x);
    }
    x
}

#[inline]
fn up_n(mut x: f64, n: usize) -> f64 {
    for _ in 0..n {
        x = up(x);
    }
    x
}

impl Bracket {
    pub const ZERO: Bracket = Bracket { lo: 0.0, hi: 0.0 };
    pub const ONE: Bracket = Bracket { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted bracket [{lo}, {hi}]");
        Bracket { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Bracket { lo: x, hi: x }
    }

    /// Encloses a value computed in round-to-nearest with `ulps` of error.
    pub fn around(x: f64, ulps: usize) -> Self {
        Bracket { lo: down_n(x, ulps), hi: up_n(x, ulps) }
    }

    /// Encloses `x` with a relative error allowance.
    pub fn with_rel(x: f64, rel: f64) -> Self {
        let pad = x.abs() * rel;
        Bracket { lo: down(x - pad), hi: up(x + pad) }
    }

    /// `[0, +inf]`
    pub fn unbounded_nonneg() -> Self {
        Bracket { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        if self.hi.is_infinite() {
            return self.hi;
        }
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_bracket(&self, other: &Bracket) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn intersect(&self, other: &Bracket) -> Option<Bracket> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Bracket { lo, hi })
    }

    pub fn hull(&self, other: &Bracket) -> Bracket {
        Bracket { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Strictly above `x`: every point of the bracket exceeds `x`.
    pub fn above(&self, x: f64) -> bool {
        self.lo > x
    }

    pub fn below(&self, x: f64) -> bool {
        self.hi < x
    }

    pub fn add(self, o: Bracket) -> Bracket {
        Bracket { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }

    pub fn sub(self, o: Bracket) -> Bracket {
        Bracket { lo: down(self.lo - o.hi), hi: up(self.hi - o.lo) }
    }

    pub fn neg(self) -> Bracket {
        Bracket { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(self, o: Bracket) -> Bracket {
        if self.lo >= 0.0 && o.lo >= 0.0 {
            return Bracket { lo: down(self.lo * o.lo), hi: up(mul_inf(self.hi, o.hi)) };
        }
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
        Bracket { lo: down(lo), hi: up(hi) }
    }

    pub fn scale(self, k: f64) -> Bracket {
        self.mul(Bracket::point(k))
    }

    /// Division by a strictly positive bracket.
    pub fn div(self, o: Bracket) -> Bracket {
        assert!(o.lo > 0.0, "division by non-positive bracket {o:?}");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
        Bracket { lo: down(lo), hi: up(hi) }
    }

    pub fn recip(self) -> Bracket {
        Bracket::ONE.div(self)
    }

    /// Natural logarithm of a positive bracket.
    pub fn ln(self) -> Bracket {
        assert!(self.lo >= 0.0, "ln of negative bracket {self:?}");
        let lo = if self.lo == 0.0 { f64::NEG_INFINITY } else { down_n(self.lo.ln(), 2) };
        Bracket { lo, hi: up_n(self.hi.ln(), 2) }
    }

    pub fn exp(self) -> Bracket {
        let lo = down_n(self.lo.exp(), 2).max(0.0);
        Bracket { lo, hi: up_n(self.hi.exp(), 2) }
    }

    /// `self^e` for a positive base and a real exponent bracket.
    pub fn powb(self, e: Bracket) -> Bracket {
        if e.lo == 0.0 && e.hi == 0.0 {
            return Bracket::ONE;
        }
        self.ln().mul(e).exp()
    }

    pub fn powf(self, e: f64) -> Bracket {
        self.powb(Bracket::point(e))
    }

    pub fn min(self, o: Bracket) -> Bracket {
        Bracket { lo: self.lo.min(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn max(self, o: Bracket) -> Bracket {
        Bracket { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }
}

fn mul_inf(a: f64, b: f64) -> f64 {
    // 0 * inf only arises for empty sums; treat as 0.
    let p = a * b;
    if p.is_nan() {
        0.0
    } else {
        p
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lo, self.hi)
    }
}

/// Round-down and round-up accumulators kept separately.
#[derive(Clone, Copy, Debug, Default)]
pub struct DirectedSum {
    lo: f64,
    hi: f64,
}

impl DirectedSum {
    pub fn add(&mut self, b: Bracket) {
        self.lo = down(self.lo + b.lo);
        self.hi = up(self.hi + b.hi);
    }

    pub fn merge(mut self, other: DirectedSum) -> DirectedSum {
        self.add(other.bracket());
        self
    }

    pub fn bracket(&self) -> Bracket {
        Bracket { lo: self.lo, hi: self.hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outward_sum_encloses_exact() {
        let third = Bracket::point(1.0).div(Bracket::point(3.0));
        let s = third.add(third).add(third);
        assert!(s.contains(1.0));
        assert!(s.width() < 1e-15);
    }

    #[test]
    fn pow_encloses() {
        let b = Bracket::point(2.0).powf(0.5);
        assert!(b.contains(std::f64::consts::SQRT_2));
        let z = Bracket::point(7.0).powf(0.0);
        assert_eq!(z, Bracket::ONE);
    }

    #[test]
    fn intersect_and_hull() {
        let a = Bracket::new(0.0, 2.0);
        let b = Bracket::new(1.0, 3.0);
        assert_eq!(a.intersect(&b), Some(Bracket::new(1.0, 2.0)));
        assert_eq!(a.hull(&b), Bracket::new(0.0, 3.0));
        assert!(Bracket::new(0.0, 0.5).intersect(&Bracket::new(0.6, 1.0)).is_none());
    }

    #[test]
    fn infinite_upper_is_preserved() {
        let a = Bracket::new(1.0, f64::INFINITY);
        let b = a.add(Bracket::point(1.0));
        assert_eq!(b.hi, f64::INFINITY);
        assert!(!b.is_finite());
    }
}
