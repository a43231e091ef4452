//! Non-certified transfer operator estimate of `λ_t` by Chebyshev collocation.

use super::moments::BulkMoments;
use crate::error::{Error, Result};
use crate::indexsets::IndexSet;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct TransferOperatorGrid {
    pub t: f64,
    pub truncation: u64,
    pub nodes: Vec<f64>,
    #[serde(skip)]
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalue: f64,
    /// Eigenfunction on `nodes`, normalized to integral 1.
    pub eigenfunction: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    weights: Vec<f64>,
}

pub(crate) fn lobatto_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos())).collect()
}

fn bary_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                s * 0.5
            } else {
                s
            }
        })
        .collect()
}

/// Lagrange basis values at `y`.
fn basis(nodes: &[f64], w: &[f64], y: f64, out: &mut [f64]) {
    for (j, &x) in nodes.iter().enumerate() {
        if y == x {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
    }
    let mut den = 0.0;
    for j in 0..nodes.len() {
        out[j] = w[j] / (y - nodes[j]);
        den += out[j];
    }
    out.iter_mut().for_each(|v| *v /= den);
}

/// Differentiation matrix on the nodes.
fn diff_matrix(nodes: &[f64], w: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                d[i][j] = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                diag -= d[i][j];
            }
        }
        d[i][i] = diag;
    }
    d
}

/// Clenshaw-Curtis weights on `[0,1]` for the Lobatto nodes (n even).
fn cc_weights(n: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    (0..=n)
        .map(|k| {
            let c = if k == 0 || k == n { 1.0 } else { 2.0 };
            let mut s = 1.0;
            for j in 1..=n / 2 {
                let b = if 2 * j == n { 1.0 } else { 2.0 };
                s -= b / (4.0 * (j * j) as f64 - 1.0) * (2.0 * (j * k) as f64 * pi / n as f64).cos();
            }
            0.5 * c / n as f64 * s
        })
        .collect()
}

impl TransferOperatorGrid {
    /// Interpolated eigenfunction at `x ∈ [0,1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let mut b = vec![0.0; self.nodes.len()];
        basis(&self.nodes, &self.weights, x, &mut b);
        b.iter().zip(&self.eigenfunction).map(|(a, v)| a * v).sum()
    }
}

/// Dominant eigenvalue of `L_t` discretized on `grid + 1` Chebyshev-Lobatto
/// nodes; digits above `truncation` enter through a quadratic Taylor
/// expansion of the eigenfunction at 0.
pub fn transfer_lambda(set: &IndexSet, t: f64, grid: usize, truncation: u64) -> Result<TransferOperatorGrid> {
    if t < 0.0 {
        return Err(Error::Domain("t must be >= 0".into()));
    }
    let cutoff = truncation.clamp(8, 1 << 20);
    let split = set.split(cutoff);
    let mom = BulkMoments::new(&split, 2.0 * t);
    transfer_from_parts(&split.explicit, &mom, t, grid)
}

/// As [`transfer_lambda`] with the alphabet already cut: `explicit` digits
/// are at most `mom.cutoff`, the rest is summarized by `mom`.
pub fn transfer_from_parts(explicit: &[u64], mom: &BulkMoments, t: f64, grid: usize) -> Result<TransferOperatorGrid> {
    let n = (grid.max(8) + 1) & !1;
    let cutoff = mom.cutoff;
    if !mom.is_finite() {
        return Err(Error::Domain(format!("Σ i^(-2t) diverges at t = {t}")));
    }
    if explicit.is_empty() && mom.is_empty() {
        return Err(Error::Domain("empty alphabet".into()));
    }
    let nodes = lobatto_nodes(n);
    let w = bary_weights(n);
    let d = diff_matrix(&nodes, &w);
    let d2_row0: Vec<f64> = (0..=n).map(|j| (0..=n).map(|k| d[0][k] * d[k][j]).sum()).collect();
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    let mut b = vec![0.0; n + 1];
    for (k, &x) in nodes.iter().enumerate() {
        for &i in explicit {
            let z = i as f64 + x;
            let wt = z.powf(-2.0 * t);
            basis(&nodes, &w, 1.0 / z, &mut b);
            for j in 0..=n {
                a[k][j] += wt * b[j];
            }
        }
        if !mom.is_empty() {
            let (w0, w1, w2) = (mom.w(0, x).mid(), mom.w(1, x).mid(), mom.w(2, x).mid());
            a[k][0] += w0;
            for j in 0..=n {
                a[k][j] += w1 * d[0][j] + 0.5 * w2 * d2_row0[j];
            }
        }
    }
    let (lambda, v, iterations) = power_iteration(&a, 1e-14, 10_000)?;
    let cc = cc_weights(n);
    let integral: f64 = cc.iter().zip(&v).map(|(c, x)| c * x).sum();
    let v: Vec<f64> = v.iter().map(|x| x / integral).collect();
    let av = matvec(&a, &v);
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let residual = av.iter().zip(&v).fold(0.0f64, |m, (p, q)| m.max((p - lambda * q).abs())) / norm;
    Ok(TransferOperatorGrid {
        t,
        truncation: cutoff,
        nodes,
        matrix: a,
        eigenvalue: lambda,
        eigenfunction: v,
        residual,
        iterations,
        weights: w,
    })
}

fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn power_iteration(a: &[Vec<f64>], tol: f64, cap: usize) -> Result<(f64, Vec<f64>, usize)> {
    let n = a.len();
    let mut v = vec![1.0; n];
    let mut lambda = 0.0;
    for it in 1..=cap {
        let mut nv = matvec(a, &v);
        let m = nv.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if m == 0.0 || !m.is_finite() {
            return Err(Error::Convergence("power iteration degenerated".into()));
        }
        nv.iter_mut().for_each(|x| *x /= m);
        let diff = nv.iter().zip(&v).fold(0.0f64, |d, (p, q)| d.max((p - q).abs()));
        v = nv;
        let prev = lambda;
        lambda = m;
        if diff < tol && (lambda - prev).abs() <= tol * lambda {
            return Ok((lambda, v, it));
        }
    }
    Err(Error::Convergence(format!("power iteration did not settle in {cap} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::{make_full, parse_set};

    #[test]
    fn gauss_measure_density() {
        let g = transfer_lambda(&make_full(), 1.0, 48, 256).unwrap();
        assert!((g.eigenvalue - 1.0).abs() < 1e-6, "{}", g.eigenvalue);
        for (x, v) in g.nodes.iter().zip(&g.eigenfunction) {
            let exact = 1.0 / ((1.0 + x) * std::f64::consts::LN_2);
            assert!((v - exact).abs() < 1e-6, "{x} {v} {exact}");
        }
    }

    #[test]
    fn single_digit_at_zero() {
        let g = transfer_lambda(&parse_set("1").unwrap(), 0.0, 32, 10).unwrap();
        assert!((g.eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_digit_golden_ratio() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let g = transfer_lambda(&parse_set("1").unwrap(), 0.7, 32, 10).unwrap();
        assert!((g.eigenvalue - phi.powf(-1.4)).abs() < 1e-10, "{}", g.eigenvalue);
    }

    #[test]
    fn diverging_tail_is_rejected() {
        assert!(transfer_lambda(&make_full(), 0.5, 32, 100).is_err());
    }
}
