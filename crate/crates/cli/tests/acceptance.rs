//! Acceptance suite: one line per criterion.
//!
//! The target always exits 0 so that a workspace test run reports every
//! line; set `CFDIM_ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

use cfdim::contfrac::rational_from_digits;
use cfdim::diophantine::{
    classify_klw_series, classify_weiss_series, condensed_series, extremality_experiment, khinchine_experiment, ApproxFn,
    KhinchineConfig, SeriesVerdict,
};
use cfdim::indexsets::{
    build_i_delta, build_liouville_set, check_c1, make_full, make_geometric, star_inclusions, CheckConfig, Construction,
    ConstructionBudget, ConstructionDetails, IndexSet,
};
use cfdim::measure::{decay_probe, geometric_pairs, lyapunov_estimate, lyapunov_series, ConformalContext};
use cfdim::pressure::{bowen_dimension, kz_increment_bounds, operator_bracket, transfer_lambda, BowenBudget};
use cfdim::DigitWord;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn i_delta() -> &'static Construction {
    static C: OnceLock<Construction> = OnceLock::new();
    C.get_or_init(|| build_i_delta(0.7, ConstructionBudget::default()).expect("I_δ construction"))
}

fn cli(args: &[&str]) -> (Value, Duration, i32) {
    let st = Instant::now();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_cfdim")).args(args).output().expect("run cfdim");
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (v, st.elapsed(), out.status.code().unwrap_or(-1))
}

fn c1_identities() -> Outcome {
    let st = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let four = BigRational::from_integer(4.into());
    let mut bad = 0;
    for _ in 0..10_000 {
        let len = rng.gen_range(1..=30);
        let w = DigitWord::from_digits((0..len).map(|_| rng.gen_range(1u64..=100))).unwrap();
        let unimodular = w.determinant().abs() == 1;
        let distortion = w.distortion_ratio() <= four;
        if !(unimodular && distortion && w.log_q_bounds_exact() == (true, true)) {
            bad += 1;
        }
    }
    let t = st.elapsed();
    outcome(bad == 0 && t.as_secs_f64() <= 10.0, format!("{bad} violations in 10^4 words, {:.2}s (limit 10s)", t.as_secs_f64()))
}

fn c2_convergent_bounds() -> Outcome {
    // exact rationals stand in for the 256-bit evaluation
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut bad = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(1..=30);
        let head: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=100)).collect();
        let tail: Vec<u64> = (0..rng.gen_range(2..=40)).map(|_| rng.gen_range(1..=1000)).collect();
        let w = DigitWord::from_digits(head.iter().copied()).unwrap();
        let next = w.append_digit(tail[0]).unwrap();
        let all: Vec<BigUint> = head.iter().chain(&tail).map(|&v| BigUint::from(v)).collect();
        let x = rational_from_digits(&all);
        let gap = (x - BigRational::new(w.p_cur().clone().into(), w.q_cur().clone().into())).abs();
        let qn = BigRational::from_integer(w.q_cur().clone().into());
        let qn1 = BigRational::from_integer(next.q_cur().clone().into());
        if !(gap < (&qn * &qn1).recip() && gap > (&qn * (&qn + &qn1)).recip()) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} violations in 10^3 extended words"))
}

fn c3_pressure_sanity() -> Outcome {
    let (full, t1, _) = cli(&["dim", "--set", "full", "--tol", "0.05"]);
    let (one, t2, _) = cli(&["dim", "--set", "1"]);
    let get = |v: &Value, k: &str| v["result"][k].as_f64().unwrap_or(f64::NAN);
    let (flo, fhi) = (get(&full, "lo"), get(&full, "hi"));
    let (olo, ohi) = (get(&one, "lo"), get(&one, "hi"));
    let ok = flo <= 1.0 && 1.0 <= fhi && fhi - flo <= 0.05 && olo <= 0.0 && 0.0 <= ohi && t1.as_secs() <= 120 && t2.as_secs() <= 120;
    outcome(ok, format!("full [{flo}, {fhi}] in {:.1}s; {{1}} [{olo}, {ohi}] in {:.1}s", t1.as_secs_f64(), t2.as_secs_f64()))
}

fn c4_one_two() -> Outcome {
    let (v, t, _) = cli(&["dim", "--set", "1,2", "--tol", "0.02"]);
    let r = &v["result"];
    let lo = r["lo"].as_f64().unwrap_or(f64::NAN);
    let ev = r["cross_check"]["transfer_eigenvalue"].as_f64().unwrap_or(f64::NAN);
    let (clo, chi) = (r["cross_check"]["certified_lambda"]["lo"].as_f64().unwrap_or(f64::NAN), r["cross_check"]["certified_lambda"]["hi"].as_f64().unwrap_or(f64::NAN));
    let ok = lo > 0.5 && clo <= ev && ev <= chi && t.as_secs() <= 300;
    outcome(ok, format!("lower end {lo}; eigenvalue {ev} in [{clo}, {chi}]; {:.1}s", t.as_secs_f64()))
}

fn c5_kz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut bad = 0;
    let mut n = 0;
    while n < 100 {
        let size = rng.gen_range(1..=8);
        let mut elems: Vec<u64> = (0..size).map(|_| rng.gen_range(1..=200)).collect();
        let i = rng.gen_range(2..=50u64);
        if elems.contains(&i) {
            continue;
        }
        let delta = rng.gen_range(0.3..=1.0);
        let base = IndexSet::finite(elems.clone()).unwrap();
        elems.push(i);
        let ext = IndexSet::finite(elems).unwrap();
        let l0 = operator_bracket(&base, delta, 512).unwrap().lambda;
        let l1 = operator_bracket(&ext, delta, 512).unwrap().lambda;
        let (lo, hi) = kz_increment_bounds(i, delta).unwrap();
        let eps = l0.width() + l1.width();
        if l1.hi < l0.lo + lo.lo - eps || l1.lo > l0.hi + hi.hi + eps {
            bad += 1;
        }
        n += 1;
    }
    outcome(bad == 0, format!("{bad} contradictions in 100 cases"))
}

fn c6_transfer() -> Outcome {
    let op = transfer_lambda(&make_full(), 1.0, 64, 1 << 16).unwrap();
    let err = op
        .nodes
        .iter()
        .zip(&op.eigenfunction)
        .map(|(x, v)| (v - 1.0 / ((1.0 + x) * std::f64::consts::LN_2)).abs())
        .fold(0.0, f64::max);
    let de = (op.eigenvalue - 1.0).abs();
    outcome(de < 1e-6 && err < 1e-6, format!("|λ − 1| = {de:.2e}, sup error {err:.2e} (limit 1e-6)"))
}

fn c7_lyapunov() -> Outcome {
    let f = |u: f64| 2.0 * u * (-u).exp() / ((1.0 + (-u).exp()) * std::f64::consts::LN_2);
    let (n, b) = (40_000, 80.0);
    let h = b / n as f64;
    let mut s = f(0.0) + f(b);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let oracle = s * h / 3.0;
    let ctx = ConformalContext::new(&make_full(), 1.0, 7).unwrap();
    let est = lyapunov_estimate(&ctx, 1_000_000, 1).unwrap();
    let rel = (est.birkhoff - oracle).abs() / oracle;

    let lio = build_liouville_set(0.4, 3, ConstructionBudget::default()).unwrap();
    let lctx = ConformalContext::at_dimension(&lio.set, 1e-6, 1).unwrap();
    let ends: Vec<u64> = match &lio.details {
        ConstructionDetails::Liouville { stages } => stages.iter().map(|s| s.log2_max.ceil() as u64 + 1).collect(),
        _ => vec![],
    };
    let top = *ends.last().unwrap_or(&64);
    let mut monotone = true;
    let mut prev = (0.0, 0.0);
    let mut at = Vec::new();
    for k in 1..=top + 2 {
        let b = lyapunov_series(&lio.set, lctx.h, &(BigUint::one() << k));
        monotone &= b.lo >= prev.0 && b.hi >= prev.1;
        prev = (b.lo, b.hi);
        if ends.contains(&k) {
            at.push(b);
        }
    }
    // every stage adds more than everything before it
    let growing = at.len() >= 3 && at.windows(2).all(|w| w[1].lo - w[0].hi > w[0].hi);
    let series: Vec<String> = at.iter().map(|b| format!("[{:.3}, {:.3}]", b.lo, b.hi)).collect();
    outcome(
        rel < 0.01 && monotone && growing,
        format!("Birkhoff {:.4} vs quadrature {oracle:.4} (rel {rel:.2e}); Liouville series at stage ends {}", est.birkhoff, series.join(" → ")),
    )
}

fn c8_constructions() -> Outcome {
    let lio = build_liouville_set(0.4, 4, ConstructionBudget::default()).unwrap();
    let stages_ok = match &lio.details {
        ConstructionDetails::Liouville { stages } => stages.len() == 4 && stages.iter().all(|s| s.gap_ok && s.kz_value <= s.kz_cap && s.window_ok),
        _ => false,
    };
    let c = i_delta();
    let n2 = match &c.details {
        ConstructionDetails::IDelta { n2, .. } => *n2,
        _ => 0,
    };
    let (m20, o20) = star_inclusions(&c.set, 0.7, 1 << 20).unwrap();
    let (m24, o24) = star_inclusions(&c.set, 0.7, 1 << 24).unwrap();
    let star_ok = m20 == m24 && o20 == o24 && m24.iter().chain(&o24).all(|&e| e < n2);
    let f = check_c1(&c.set, 0.7, &CheckConfig::default());
    let ratio = f.range.map(|(a, b)| b / a).unwrap_or(f64::INFINITY);
    let tr = c.set.truncate_count(1000).unwrap();
    let d = bowen_dimension(&tr, 1e-3, BowenBudget::default()).unwrap().dimension;
    let dim_ok = d.lo >= 0.63 && d.hi <= 0.77;
    outcome(
        stages_ok && star_ok && ratio <= 64.0 && dim_ok,
        format!(
            "Liouville stages {}; star exceptions {}+{} below N2={n2} {}; c1 max/min {ratio:.1} (limit 64, witness {}); truncation dim [{:.4}, {:.4}]",
            if stages_ok { "ok" } else { "violated" },
            m24.len(),
            o24.len(),
            if star_ok { "ok" } else { "violated" },
            f.witness.unwrap_or_default(),
            d.lo,
            d.hi
        ),
    )
}

fn c9_khinchine() -> Outcome {
    let st = Instant::now();
    let c = i_delta();
    let ctx = ConformalContext::at_dimension(&c.set, 1e-6, 1).unwrap();
    let div = KhinchineConfig { psi: ApproxFn::Log { alpha: ctx.h }, k: 1.0, depth: 10_000, n_samples: 1000, prefix: 32 };
    let a = khinchine_experiment(&ctx, &div).unwrap();
    let conv = KhinchineConfig { psi: ApproxFn::Power { c: 0.5 }, ..div.clone() };
    let b = khinchine_experiment(&ctx, &conv).unwrap();
    let last = *a.survival.last().unwrap();
    let majorized = a.survival.iter().zip(&a.bound).all(|(s, u)| s <= u);
    let t = st.elapsed().as_secs_f64();
    outcome(
        last < 0.05 && majorized && b.witness_fraction <= 0.10 && t <= 600.0,
        format!(
            "h = {:.6}; log(h) survival at depth 10^4 = {last:.3} (need < 0.05), bound {:.3}, majorized {majorized}; power(0.5) witness fraction {:.3} (limit 0.10); {t:.0}s",
            ctx.h,
            a.bound.last().unwrap(),
            b.witness_fraction
        ),
    )
}

fn c10_extremality() -> Outcome {
    let geo = ConformalContext::at_dimension(&make_geometric(2).unwrap(), 1e-6, 1).unwrap();
    let g = extremality_experiment(&geo, &[1.0], 10_000, 1000, 32).unwrap();
    let lio = build_liouville_set(0.4, 3, ConstructionBudget::default()).unwrap();
    let lctx = ConformalContext::at_dimension(&lio.set, 1e-6, 1).unwrap();
    let l = extremality_experiment(&lctx, &[2.0], 10_000, 1000, 32).unwrap();
    outcome(
        g.witness_fraction[0] <= 0.05 && l.liouville_fraction[0] >= 0.9,
        format!(
            "geometric VWA fraction {:.3} (limit 0.05); Liouville running max > 2 in {:.3} of samples (need 0.9), median {:.1}",
            g.witness_fraction[0], l.liouville_fraction[0], l.liouville_median
        ),
    )
}

fn c11_series() -> Outcome {
    use SeriesVerdict::*;
    // Σ 1/(q φ(q)^α): p-series, harmonic, or Σ 1/(q log^{α/α0} q)
    let fams = [ApproxFn::Power { c: 0.5 }, ApproxFn::Scaled { eps: 0.1 }, ApproxFn::Log { alpha: 0.7 }];
    let expect = |f: &ApproxFn, a: f64| match f {
        ApproxFn::Power { .. } => Converges,
        ApproxFn::Scaled { .. } => Diverges,
        ApproxFn::Log { alpha } => {
            if a / alpha > 1.0 {
                Converges
            } else {
                Diverges
            }
        }
        ApproxFn::Custom { .. } => Undetermined,
    };
    let mut bad = Vec::new();
    for f in &fams {
        for a in [0.3, 0.7, 0.9, 1.0] {
            let w = classify_weiss_series(f, a).verdict;
            let c = condensed_series(f, a, 4.0, 200).unwrap().verdict;
            if w != expect(f, a) || c != w {
                bad.push(format!("{f} at {a}"));
            }
        }
        if classify_klw_series(f).verdict != expect(f, 1.0) {
            bad.push(format!("klw {f}"));
        }
    }
    let pair = ApproxFn::Log { alpha: 0.7 };
    let counter = classify_klw_series(&pair).verdict == Converges && classify_weiss_series(&pair, 0.7).verdict == Diverges;
    outcome(bad.is_empty() && counter, format!("mismatches {:?}; log(0.7) KLW converges and weiss diverges: {counter}", bad))
}

fn c12_decay() -> Outcome {
    let ctx = ConformalContext::at_dimension(&make_geometric(2).unwrap(), 1e-6, 3).unwrap();
    let rows = decay_probe(&ctx, &geometric_pairs(2, 3..=8), 400_000, 30).unwrap();
    let mut ok = rows.len() == 6;
    let mut parts = Vec::new();
    for (n, r) in (3..=8).zip(&rows) {
        let good = !r.inconclusive && r.ratio.is_some_and(|v| v >= 0.9) && r.epsilon <= 2f64.powi(-(n as i32) + 1);
        ok &= good;
        parts.push(format!("n={n}: {:.3}", r.ratio.unwrap_or(f64::NAN)));
    }
    outcome(ok, parts.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("exact identities", c1_identities),
        ("convergent bounds", c2_convergent_bounds),
        ("pressure sanity", c3_pressure_sanity),
        ("HD(J_{1,2}) > 1/2", c4_one_two),
        ("KZ increments", c5_kz),
        ("transfer-operator exactness", c6_transfer),
        ("Lyapunov", c7_lyapunov),
        ("construction conformance", c8_constructions),
        ("Khinchine dichotomy", c9_khinchine),
        ("extremality contrast", c10_extremality),
        ("series classifiers", c11_series),
        ("non-decay witness", c12_decay),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if filter.as_deref().is_some_and(|p| !name.contains(p) && p != (i + 1).to_string()) {
            continue;
        }
        let st = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} #{:<2} {name}: {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail, st.elapsed().as_secs_f64());
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 && std::env::var("CFDIM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
