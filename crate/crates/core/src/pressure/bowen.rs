//! Dimension brackets from Bowen's equation `P_I(t) = 0`.

use super::operator::{operator_bracket, CELL_LEVELS};
use crate::bracket::Bracket;
use crate::error::Result;
use crate::indexsets::IndexSet;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BowenBudget {
    /// Finest grid used by the certified operator bracket.
    pub max_cells: usize,
    /// Cap on certified λ evaluations.
    pub max_evaluations: usize,
}

impl Default for BowenBudget {
    fn default() -> Self {
        BowenBudget { max_cells: 2048, max_evaluations: 400 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BowenResult {
    pub dimension: Bracket,
    pub converged: bool,
    pub evaluations: usize,
    pub finest_cells: usize,
}

/// Certified `λ_t` bracket, refining the grid until it separates from 1 or
/// the budget is reached.
pub fn lambda_vs_one(set: &IndexSet, t: f64, start_level: usize, max_cells: usize) -> Result<(Bracket, usize, usize)> {
    let mut level = start_level;
    let mut evals = 0;
    loop {
        let cells = CELL_LEVELS[level];
        let b = operator_bracket(set, t, cells)?.lambda;
        evals += 1;
        if b.lo > 1.0 || b.hi < 1.0 {
            return Ok((b, level, evals));
        }
        if level + 1 >= CELL_LEVELS.len() || CELL_LEVELS[level + 1] > max_cells {
            return Ok((b, level, evals));
        }
        level += 1;
    }
}

/// `HD(J_I) = inf{t ≥ 0 : P_I(t) ≤ 0}` by certified bisection on `[0, 1]`.
pub fn bowen_dimension(set: &IndexSet, tol: f64, budget: BowenBudget) -> Result<BowenResult> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut evals = 0;
    let mut level = 0;
    let mut finest = CELL_LEVELS[0];
    let mut converged = true;
    while hi - lo > tol {
        if evals >= budget.max_evaluations {
            converged = false;
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (b, l, e) = lambda_vs_one(set, mid, level, budget.max_cells)?;
        evals += e;
        level = l;
        finest = finest.max(CELL_LEVELS[l]);
        if b.lo > 1.0 {
            lo = mid;
        } else if b.hi < 1.0 {
            hi = mid;
        } else {
            // the root sits inside the grid resolution: probe on either side
            let q = tol / 4.0;
            let (bl, _, e1) = lambda_vs_one(set, mid - q, level, budget.max_cells)?;
            let (bh, _, e2) = lambda_vs_one(set, mid + q, level, budget.max_cells)?;
            evals += e1 + e2;
            let mut moved = false;
            if bl.lo > 1.0 && mid - q > lo {
                lo = mid - q;
                moved = true;
            }
            if bh.hi < 1.0 && mid + q < hi {
                hi = mid + q;
                moved = true;
            }
            if !moved {
                converged = false;
                break;
            }
        }
    }
    Ok(BowenResult { dimension: Bracket::new(lo, hi), converged: converged && hi - lo <= tol, evaluations: evals, finest_cells: finest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::parse_set;

    #[test]
    fn one_two_dimension() {
        let r = bowen_dimension(&parse_set("1,2").unwrap(), 0.02, BowenBudget::default()).unwrap();
        assert!(r.converged);
        assert!(r.dimension.lo > 0.5 && r.dimension.hi < 0.56, "{}", r.dimension);
    }

    #[test]
    fn singleton_dimension_zero() {
        let r = bowen_dimension(&parse_set("1").unwrap(), 0.01, BowenBudget::default()).unwrap();
        assert!(r.dimension.contains(0.0));
    }
}
