//! Python bindings: alphabets are given as `"1,2,5"`, `"full"`, or a
//! family spec such as `"geometric:2"`, `"idelta:0.7"`, `"liouville:0.4:3"`.

use cfdim::diophantine::{classify_klw_series, classify_weiss_series, khinchine_experiment, ApproxFn, KhinchineConfig};
use cfdim::indexsets::{
    build_i_delta, build_liouville_set, build_r, check_c1, check_c2_gap, check_c3_tail, check_lower_b, check_upper_b,
    parse_family, parse_set, CheckConfig, ConstructionBudget, IndexSet, RegularityReport,
};
use cfdim::measure::{lyapunov_estimate, ConformalContext};
use cfdim::pressure::{bowen_dimension, operator_bracket, BowenBudget};
use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: cfdim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn resolve(spec: &str) -> PyResult<IndexSet> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> PyResult<f64> {
        parts.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| PyValueError::new_err(format!("malformed alphabet {spec:?}")))
    };
    let b = ConstructionBudget::default();
    let set = match parts[0].trim() {
        "r" => build_r(num(1)?, b).map(|c| c.set),
        "idelta" => build_i_delta(num(1)?, b).map(|c| c.set),
        "liouville" => build_liouville_set(num(1)?, num(2)? as usize, b).map(|c| c.set),
        _ if parts.len() > 1 => parse_family(spec),
        _ => parse_set(spec),
    };
    set.map_err(err)
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

/// Certified dimension bracket `(lo, hi, certified)`.
#[pyfunction]
#[pyo3(signature = (alphabet, tol = 0.01))]
fn dimension(alphabet: &str, tol: f64) -> PyResult<(f64, f64, bool)> {
    let r = bowen_dimension(&resolve(alphabet)?, tol, BowenBudget::default()).map_err(err)?;
    Ok((r.dimension.lo, r.dimension.hi, r.converged))
}

/// Certified `λ_t` bracket.
#[pyfunction]
#[pyo3(signature = (alphabet, t, cells = 1024))]
fn lambda_bracket(alphabet: &str, t: f64, cells: usize) -> PyResult<(f64, f64)> {
    let b = operator_bracket(&resolve(alphabet)?, t, cells).map_err(err)?.lambda;
    Ok((b.lo, b.hi))
}

/// First `count` elements of the alphabet.
#[pyfunction]
#[pyo3(signature = (alphabet, count = 20))]
fn elements(alphabet: &str, count: usize) -> PyResult<Vec<BigUint>> {
    Ok(resolve(alphabet)?.first_n(count).iter().map(|d| d.to_big()).collect())
}

/// Regularity report as a dict.
#[pyfunction]
#[pyo3(signature = (alphabet, h, criteria = vec!["c1".to_string(), "c3".to_string()]))]
fn check(py: Python<'_>, alphabet: &str, h: f64, criteria: Vec<String>) -> PyResult<Py<PyAny>> {
    let set = resolve(alphabet)?;
    let cfg = CheckConfig::default();
    let k_max = BigUint::from(1u32) << 40u32;
    let mut fragments = Vec::new();
    for c in &criteria {
        fragments.push(match c.as_str() {
            "c1" => check_c1(&set, h, &cfg),
            "c2" => check_c2_gap(&set, &k_max, &cfg),
            "c3" => check_c3_tail(&set, h, &cfg),
            "lower-b" => check_lower_b(&set, h, &cfg),
            "upper-b" => check_upper_b(&set, h, &cfg),
            other => return Err(PyValueError::new_err(format!("unknown criterion {other:?}"))),
        });
    }
    to_py(py, &RegularityReport { h, fragments })
}

/// Digit paths from the conformal measure at exponent `h` (default: the dimension).
#[pyfunction]
#[pyo3(signature = (alphabet, depth, samples = 1, seed = 1, h = None))]
fn sample(alphabet: &str, depth: usize, samples: usize, seed: u64, h: Option<f64>) -> PyResult<Vec<Vec<BigUint>>> {
    let set = resolve(alphabet)?;
    let ctx = match h {
        Some(h) => ConformalContext::new(&set, h, seed),
        None => ConformalContext::at_dimension(&set, 1e-6, seed),
    }
    .map_err(err)?;
    (0..samples)
        .map(|r| ctx.sample_point(depth, r as u64).map(|p| p.digits.iter().map(|d| d.to_big()).collect()).map_err(err))
        .collect()
}

/// Birkhoff estimate of the Lyapunov exponent.
#[pyfunction]
#[pyo3(signature = (alphabet, steps = 100_000, seed = 1, h = None))]
fn lyapunov(alphabet: &str, steps: usize, seed: u64, h: Option<f64>) -> PyResult<(f64, f64)> {
    let set = resolve(alphabet)?;
    let ctx = match h {
        Some(h) => ConformalContext::new(&set, h, seed),
        None => ConformalContext::at_dimension(&set, 1e-6, seed),
    }
    .map_err(err)?;
    let e = lyapunov_estimate(&ctx, steps, 1).map_err(err)?;
    Ok((e.birkhoff, e.stderr))
}

/// Khinchine survival experiment as a dict.
#[pyfunction]
#[pyo3(signature = (alphabet, psi, k = 1.0, depth = 1000, samples = 100, prefix = 32, seed = 1))]
fn khinchine(py: Python<'_>, alphabet: &str, psi: &str, k: f64, depth: usize, samples: usize, prefix: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let set = resolve(alphabet)?;
    let ctx = ConformalContext::at_dimension(&set, 1e-6, seed).map_err(err)?;
    let psi = match psi.split_once(':') {
        Some((name, "h")) => ApproxFn::parse(&format!("{name}:{}", ctx.h)),
        _ => ApproxFn::parse(psi),
    }
    .map_err(err)?;
    let cfg = KhinchineConfig { psi, k, depth, n_samples: samples, prefix };
    to_py(py, &khinchine_experiment(&ctx, &cfg).map_err(err)?)
}

/// `(weiss verdict, KLW verdict)` for a ψ family such as `"log:0.7"`.
#[pyfunction]
fn classify_series(psi: &str, alpha: f64) -> PyResult<(String, String)> {
    let f = ApproxFn::parse(psi).map_err(err)?;
    Ok((classify_weiss_series(&f, alpha).verdict.to_string(), classify_klw_series(&f).verdict.to_string()))
}

#[pymodule]
fn cfdim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(dimension, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(elements, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(khinchine, m)?)?;
    m.add_function(wrap_pyfunction!(classify_series, m)?)?;
    Ok(())
}
