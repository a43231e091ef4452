//! Power sums of the bulk of an alphabet, `W_s(x) = Σ_{i > T} (i+x)^{-s}`,
//! through moments `M_r = Σ_{i > T} i^{-r}` and a cubic Taylor remainder.

use crate::bracket::{Bracket, DirectedSum};
use crate::indexsets::Split;

/// Moments `M_{s0 + j}` for `j = 0..ORDERS`.
#[derive(Clone, Debug)]
pub struct BulkMoments {
    pub s0: f64,
    pub cutoff: u64,
    m: Vec<Bracket>,
}

const ORDERS: usize = 7;

impl BulkMoments {
    pub fn new(split: &Split, s0: f64) -> Self {
        let m = (0..ORDERS)
            .map(|j| {
                let mut acc = DirectedSum::default();
                for p in &split.bulk {
                    acc.add(p.power_sum(s0 + j as f64, 0.0, 0.0));
                }
                acc.bracket()
            })
            .collect();
        BulkMoments { s0, cutoff: split.cutoff, m }
    }

    /// No bulk digits.
    pub fn empty(s0: f64, cutoff: u64) -> Self {
        BulkMoments { s0, cutoff, m: vec![Bracket::ZERO; ORDERS] }
    }

    /// Add one digit `i > cutoff`.
    pub fn add_digit(&mut self, i: u64) {
        debug_assert!(i > self.cutoff);
        let ln_i = Bracket::point(i as f64).ln();
        for (j, m) in self.m.iter_mut().enumerate() {
            *m = m.add(ln_i.scale(-(self.s0 + j as f64)).exp());
        }
    }

    /// Sum of the moments of two disjoint bulk parts.
    pub fn plus(&self, o: &BulkMoments) -> BulkMoments {
        assert!(self.s0 == o.s0 && self.cutoff == o.cutoff);
        BulkMoments { s0: self.s0, cutoff: self.cutoff, m: self.m.iter().zip(&o.m).map(|(a, b)| a.add(*b)).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.m[0].is_finite()
    }

    pub fn is_empty(&self) -> bool {
        self.m[0].hi == 0.0
    }

    /// `W_{s0+j}(x)` for `x ∈ [0, 1]`, `j <= 2`.
    pub fn w(&self, j: usize, x: f64) -> Bracket {
        assert!(j + 4 < ORDERS);
        if self.is_empty() {
            return Bracket::ZERO;
        }
        let s = self.s0 + j as f64;
        let xb = Bracket::point(x);
        let x2 = xb.mul(xb);
        let c2 = s * (s + 1.0) / 2.0;
        let c3 = s * (s + 1.0) * (s + 2.0) / 6.0;
        let c4 = c3 * (s + 3.0) / 4.0;
        let x3 = x2.mul(xb);
        let p = self.m[j]
            .sub(xb.mul(self.m[j + 1]).scale(s))
            .add(x2.mul(self.m[j + 2]).scale(c2))
            .sub(x3.mul(self.m[j + 3]).scale(c3));
        let r = x3.mul(xb).mul(self.m[j + 4]).scale(c4);
        // (1+u)^{-s} lies between its cubic and quartic Taylor polynomials
        let crude = self.crude(j);
        Bracket::new(p.lo, p.hi + r.hi).intersect(&crude).unwrap_or(crude)
    }

    /// `[W(1), W(0)]`-style bound valid for every `x ∈ [0,1]`.
    fn crude(&self, j: usize) -> Bracket {
        Bracket::new(0.0, self.m[j].hi)
    }

    /// Enclosure of `W_{s0+j}` over `x ∈ [a, b]` (decreasing in `x`).
    pub fn w_range(&self, j: usize, a: f64, b: f64) -> Bracket {
        Bracket::new(self.w(j, b).lo, self.w(j, a).hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::make_full;

    #[test]
    fn full_bulk_matches_direct_sum() {
        let sp = make_full().split(1000);
        let mo = BulkMoments::new(&sp, 2.0);
        for &x in &[0.0, 0.3, 1.0] {
            let direct: f64 = (1001..2_000_000u64).map(|i| (i as f64 + x).powi(-2)).sum::<f64>()
                + 1.0 / (2_000_000.0 + x - 0.5);
            let w = mo.w(0, x);
            assert!((w.mid() - direct).abs() < 1e-9 * direct, "{w} {direct}");
            assert!(w.width() < 1e-10);
        }
    }
}
