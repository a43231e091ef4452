//! Certified `λ_t(I)` brackets from a positive piecewise-linear test function.
//!
//! For any positive continuous `f`, `min (L_t f)/f ≤ λ_t ≤ max (L_t f)/f`.
//! `f` interpolates the collocation eigenfunction on a uniform grid of
//! `cells` cells, and the ratio is enclosed cell by cell: with
//! `g = L_t f − λ̂ f`, `g(X) ⊂ g(m) + [−ρ, ρ]·g'(X)` and `ratio = λ̂ + g/f`.
//! Digits above the grid size only see the first cell, where `f` is linear,
//! so their contribution is `f(0)·W_{2t}(x) + f'(0)·W_{2t+1}(x)`.

use super::moments::BulkMoments;
use super::transfer::transfer_from_parts;
use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::indexsets::IndexSet;
use rayon::prelude::*;
use serde::Serialize;

/// Grid sizes tried by the refinement loops, coarse to fine.
pub const CELL_LEVELS: [usize; 5] = [256, 512, 1024, 2048, 4096];

/// A positive piecewise-linear function on a uniform grid of `[0,1]`.
#[derive(Clone, Debug, Serialize)]
pub struct PlFunction {
    pub values: Vec<f64>,
}

impl PlFunction {
    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        let g = self.cells();
        let u = (y * g as f64).clamp(0.0, g as f64);
        let j = (u as usize).min(g - 1);
        let fr = u - j as f64;
        self.values[j] + fr * (self.values[j + 1] - self.values[j])
    }

    #[inline]
    fn slope(&self, j: usize) -> f64 {
        (self.values[j + 1] - self.values[j]) * self.cells() as f64
    }

    #[inline]
    fn cell_of(&self, y: f64) -> usize {
        let g = self.cells();
        ((y * g as f64) as usize).min(g - 1)
    }

    /// `(min f, max f, min f', max f')` over `[y0, y1]`.
    fn range(&self, y0: f64, y1: f64) -> (f64, f64, f64, f64) {
        let (j0, j1) = (self.cell_of(y0), self.cell_of(y1));
        let (a, b) = (self.eval(y0), self.eval(y1));
        let (mut lo, mut hi) = (a.min(b), a.max(b));
        let (mut slo, mut shi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in j0..=j1 {
            let s = self.slope(j);
            slo = slo.min(s);
            shi = shi.max(s);
            if j > j0 {
                lo = lo.min(self.values[j]);
                hi = hi.max(self.values[j]);
            }
        }
        (lo, hi, slo, shi)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }
}

/// Result of a certified evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorBracket {
    pub t: f64,
    pub cells: usize,
    pub lambda: Bracket,
    /// Centre used in the ratio enclosure (collocation eigenvalue).
    pub estimate: f64,
    #[serde(skip)]
    pub test_function: Option<PlFunction>,
}

fn interval_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let c = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    (c.iter().cloned().fold(f64::INFINITY, f64::min), c.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Certified bracket for `λ_t(I)` on a grid of `cells` cells.
pub fn operator_bracket(set: &IndexSet, t: f64, cells: usize) -> Result<OperatorBracket> {
    if t < 0.0 {
        return Err(Error::Domain("t must be >= 0".into()));
    }
    if cells < 8 {
        return Err(Error::Domain("at least 8 cells are needed".into()));
    }
    let split = set.split(cells as u64);
    let mom = BulkMoments::new(&split, 2.0 * t);
    operator_bracket_parts(&split.explicit, &mom, t)
}

/// As [`operator_bracket`] with the alphabet already cut at `mom.cutoff`,
/// which is also the number of cells.
pub fn operator_bracket_parts(explicit: &[u64], mom: &BulkMoments, t: f64) -> Result<OperatorBracket> {
    let cells = mom.cutoff as usize;
    if !mom.is_finite() {
        let inf = Bracket::new(f64::INFINITY, f64::INFINITY);
        return Ok(OperatorBracket { t, cells, lambda: inf, estimate: f64::INFINITY, test_function: None });
    }
    let grid = transfer_from_parts(explicit, mom, t, 48)?;
    let f = PlFunction { values: (0..=cells).map(|k| grid.eval(k as f64 / cells as f64)).collect() };
    if f.min_value() <= 0.0 || !f.min_value().is_finite() {
        return Err(Error::Convergence("collocation eigenfunction is not positive".into()));
    }
    let lam = bracket_with(explicit, mom, t, &f, grid.eigenvalue);
    Ok(OperatorBracket { t, cells, lambda: lam, estimate: grid.eigenvalue, test_function: Some(f) })
}

/// Collatz-Wielandt enclosure for a given test function.
pub fn bracket_with(explicit: &[u64], mom: &BulkMoments, t: f64, f: &PlFunction, centre: f64) -> Bracket {
    let g = f.cells();
    let t2 = 2.0 * t;
    let f0 = f.values[0];
    let s0 = f.slope(0);
    let eps = f64::EPSILON;
    let per_cell: Vec<(f64, f64)> = (0..g)
        .into_par_iter()
        .map(|c| {
            let a = c as f64 / g as f64;
            let b = (c + 1) as f64 / g as f64;
            let m = 0.5 * (a + b);
            let rho = 0.5 * (b - a);
            let mut lf = 0.0;
            let mut abs_terms = 0.0;
            let (mut dlo, mut dhi) = (0.0, 0.0);
            for &i in explicit {
                let i = i as f64;
                let zm = i + m;
                let w = zm.powf(-t2);
                let v = w * f.eval(1.0 / zm);
                lf += v;
                abs_terms += v;
                // derivative enclosure over the cell
                let (za, zb) = (i + a, i + b);
                let (pa, pb) = (za.powf(-t2), zb.powf(-t2));
                let w1 = (pb / zb, pa / za);
                let w2 = (pb / (zb * zb), pa / (za * za));
                let (flo, fhi, slo, shi) = f.range(1.0 / zb, 1.0 / za);
                let t1 = interval_mul(w1, (flo, fhi));
                let t2v = interval_mul(w2, (slo, shi));
                dlo += -t2 * t1.1 - t2v.1;
                dhi += -t2 * t1.0 - t2v.0;
                abs_terms += rho * (t2 * t1.1.abs() + t2v.0.abs().max(t2v.1.abs()));
            }
            // bulk: f0·W_{2t} + s0·W_{2t+1}
            let bulk = mom.w(0, m).scale(f0).add(mom.w(1, m).scale(s0));
            let wd1 = mom.w_range(1, a, b);
            let wd2 = mom.w_range(2, a, b);
            let bd = wd1.scale(-t2 * f0).add(wd2.scale(-(t2 + 1.0) * s0));
            dlo += bd.lo;
            dhi += bd.hi;
            let sc = f.slope(c);
            let fm = f.eval(m);
            dlo -= centre * sc;
            dhi -= centre * sc;
            let gm = lf - centre * fm;
            // floating-point budget: every term carries a few ulps
            let n = explicit.len() as f64 + 16.0;
            let err = 64.0 * n * eps * (abs_terms + centre * fm + bulk.hi.abs() + bd.lo.abs().max(bd.hi.abs()));
            let dmax = dlo.abs().max(dhi.abs());
            let glo = gm + bulk.lo - rho * dmax - err;
            let ghi = gm + bulk.hi + rho * dmax + err;
            let (fl, fh) = (f.values[c].min(f.values[c + 1]), f.values[c].max(f.values[c + 1]));
            let rlo = if glo >= 0.0 { glo / fh } else { glo / fl };
            let rhi = if ghi >= 0.0 { ghi / fl } else { ghi / fh };
            (centre + rlo, centre + rhi)
        })
        .collect();
    let lo = per_cell.iter().fold(f64::INFINITY, |m, r| m.min(r.0));
    let hi = per_cell.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.1));
    let pad = 8.0 * eps * centre.abs();
    Bracket::new((lo - pad).max(0.0), hi + pad)
}
