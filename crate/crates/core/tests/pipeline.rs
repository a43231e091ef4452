use cfdim::diophantine::{khinchine_experiment, ApproxFn, KhinchineConfig};
use cfdim::indexsets::{make_full, make_geometric, make_i0, IndexSet};
use cfdim::measure::{lyapunov_estimate, ConformalContext};
use cfdim::pressure::{bowen_dimension, transfer_lambda, BowenBudget};

/// `Σ_{ω ∈ D^n} q_n(ω)^{-2t}` by enumerating all words.
fn brute_level_sum(digits: &[u64], t: f64, n: usize) -> f64 {
    let mut states = vec![(0f64, 1f64)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(states.len() * digits.len());
        for &(qp, q) in &states {
            for &d in digits {
                next.push((q, d as f64 * q + qp));
            }
        }
        states = next;
    }
    states.iter().map(|&(_, q)| q.powf(-2.0 * t)).sum()
}

#[test]
fn dimension_of_one_two_matches_level_sum_ratio() {
    // λ_t ≈ S_{n+1}/S_n; find t with ratio 1 by bisection
    let ratio = |t: f64| brute_level_sum(&[1, 2], t, 17) / brute_level_sum(&[1, 2], t, 16);
    let (mut lo, mut hi) = (0.4, 0.7);
    for _ in 0..50 {
        let m = 0.5 * (lo + hi);
        if ratio(m) > 1.0 {
            lo = m
        } else {
            hi = m
        }
    }
    let oracle = 0.5 * (lo + hi);
    let set = IndexSet::finite(vec![1, 2]).unwrap();
    let r = bowen_dimension(&set, 1e-4, BowenBudget::default()).unwrap();
    assert!(r.converged);
    assert!(r.dimension.lo - 1e-5 <= oracle && oracle <= r.dimension.hi + 1e-5, "{:?} vs {oracle}", r.dimension);
    assert!(r.dimension.lo > 0.5);
}

#[test]
fn gauss_density_is_the_eigenfunction() {
    let op = transfer_lambda(&make_full(), 1.0, 64, 1 << 16).unwrap();
    assert!((op.eigenvalue - 1.0).abs() < 1e-6, "{}", op.eigenvalue);
    for (x, v) in op.nodes.iter().zip(&op.eigenfunction) {
        let want = 1.0 / ((1.0 + x) * std::f64::consts::LN_2);
        assert!((v - want).abs() < 1e-6, "{x}: {v} vs {want}");
    }
}

#[test]
fn gauss_lyapunov_matches_quadrature() {
    // composite Simpson on ∫_0^1 −2 ln x /((1+x) ln 2) dx after x = e^{-u}
    let f = |u: f64| 2.0 * u * (-u).exp() / ((1.0 + (-u).exp()) * std::f64::consts::LN_2);
    let (n, b) = (20_000, 60.0);
    let h = b / n as f64;
    let mut s = f(0.0) + f(b);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let oracle = s * h / 3.0;
    let ctx = ConformalContext::new(&make_full(), 1.0, 11).unwrap();
    let est = lyapunov_estimate(&ctx, 100_000, 4).unwrap();
    assert!((est.birkhoff - oracle).abs() < 0.02 * oracle, "{} vs {oracle}", est.birkhoff);
}

#[test]
fn i0_prefix_is_base_four_pattern() {
    // sums of distinct powers of 4 including 4^0
    let mut oracle: Vec<u64> = (0u64..64).map(|m| 1 + 4 * (0..6).filter(|b| m >> b & 1 == 1).map(|b| 4u64.pow(b)).sum::<u64>()).collect();
    oracle.sort_unstable();
    let set = make_i0(0.5).unwrap();
    assert_eq!(set.elements_upto(oracle[15]), oracle[..16].to_vec());
}

#[test]
fn survival_is_monotone_in_depth_and_k() {
    let set = make_geometric(2).unwrap();
    let ctx = ConformalContext::at_dimension(&set, 1e-6, 5).unwrap();
    let run = |k: f64| {
        let cfg = KhinchineConfig { psi: ApproxFn::Log { alpha: ctx.h }, k, depth: 300, n_samples: 200, prefix: 8 };
        khinchine_experiment(&ctx, &cfg).unwrap()
    };
    let (a, b) = (run(1.0), run(4.0));
    for s in [&a.survival, &a.bound, &b.survival] {
        assert!(s.windows(2).all(|w| w[1] <= w[0]));
    }
    assert!(a.survival.iter().zip(&b.survival).all(|(x, y)| x <= y));
    assert_eq!(a.gamma, b.gamma);
}
