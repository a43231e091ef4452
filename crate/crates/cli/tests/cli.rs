use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfdim")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn dim_examples() {
    let v = json(&["dim", "--set", "1,2", "--tol", "0.02"]);
    assert_eq!(v["schema_version"], 1);
    assert!(v["result"]["lo"].as_f64().unwrap() > 0.5);
    let v = json(&["dim", "--set", "1"]);
    assert!(v["result"]["lo"].as_f64().unwrap() <= 0.0);
    let v = json(&["dim", "--set", "full", "--tol", "0.05"]);
    let (lo, hi) = (v["result"]["lo"].as_f64().unwrap(), v["result"]["hi"].as_f64().unwrap());
    assert!(lo <= 1.0 && 1.0 <= hi);
}

#[test]
fn construct_examples() {
    let v = json(&["construct", "i0", "--delta", "0.5", "--count", "8"]);
    let want: Vec<u64> = vec![1, 5, 17, 21, 65, 69, 81, 85];
    let got: Vec<u64> = v["result"]["set"]["elements"].as_array().unwrap().iter().map(|e| e.as_u64().unwrap()).collect();
    assert_eq!(got, want);
    let v = json(&["construct", "geometric", "--a", "2", "--count", "4"]);
    assert_eq!(v["result"]["set"]["elements"], serde_json::json!([2, 4, 8, 16]));
    let v = json(&["construct", "liouville", "--delta", "0.4", "--stages", "3"]);
    let stages = v["result"]["details"]["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 3);
    assert!(stages.iter().all(|s| s["window_ok"] == true && s["gap_ok"] == true));
    assert!(!v["result"]["audit"].as_array().unwrap().is_empty());
}

#[test]
fn check_examples() {
    let v = json(&["check", "--set", "full", "--h", "1", "--criteria", "c1"]);
    assert_eq!(v["result"]["overall"], "pass");
    let v = json(&["check", "--family", "geometric:2", "--h", "0.3", "--criteria", "c1"]);
    assert_eq!(v["result"]["overall"], "fail");
    assert!(v["result"]["report"]["fragments"][0]["witness"].is_string());
    let v = json(&["check", "--family", "i0:0.5", "--h", "0.5", "--criteria", "c1,c3"]);
    assert_eq!(v["result"]["overall"], "pass");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["dim", "--set", "0,1"]).status.code(), Some(2));
    assert_eq!(run(&["dim", "--family", "nonsense:1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // a two-step bisection cannot reach the tolerance
    let out = run(&["dim", "--set", "1,2", "--tol", "1e-9", "--max-evals", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["certified"], false);
    assert_eq!(run(&["experiment", "khinchine", "--family", "geometric:2", "--psi", "power:-1"]).status.code(), Some(3));
}

#[test]
fn output_is_deterministic_across_workers() {
    let args = ["experiment", "extremality", "--family", "geometric:2", "--depth", "300", "--samples", "40", "--seed", "9"];
    let a = Command::new(env!("CARGO_BIN_EXE_cfdim")).args(args).env("CFDIM_WORKERS", "1").output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_cfdim")).args(args).env("CFDIM_WORKERS", "3").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["sample", "--family", "i0:0.5", "--depth", "30", "--samples", "2", "--seed", "4"]);
    let d = run(&["sample", "--family", "i0:0.5", "--depth", "30", "--samples", "2", "--seed", "4"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn csv_and_alphabet_file() {
    let dir = std::env::temp_dir().join(format!("cfdim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("alphabet.txt");
    std::fs::write(&file, "# two digits\n1\n2 # second\n").unwrap();
    let out = run(&["pressure", "--alphabet-file", file.to_str().unwrap(), "--t", "0.5,0.6", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "schema_version,1");
    assert_eq!(lines[1], "t,lambda_lo,lambda_hi,pressure_lo,pressure_hi");
    assert_eq!(lines.len(), 4);
    // λ_t({1,2}) crosses 1 between 0.5 and 0.6
    let lam = |l: &str| l.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(lam(lines[2]) > 1.0 && lam(lines[3]) < 1.0);
    let target = dir.join("out.json");
    assert!(run(&["dim", "--set", "1", "-o", target.to_str().unwrap()]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["command"], "dim");
    std::fs::write(&file, "2\n1\n").unwrap();
    assert_eq!(run(&["dim", "--alphabet-file", file.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn presets_load_and_flags_override() {
    let preset = concat!(env!("CARGO_MANIFEST_DIR"), "/presets/geometric-extremality.toml");
    let v = json(&["experiment", "--preset", preset, "--depth", "200", "--samples", "20"]);
    assert_eq!(v["command"], "experiment:extremality");
    assert_eq!(v["config"]["depth"], 200);
    assert_eq!(v["config"]["alphabet"], "family:geometric:2");
    assert_eq!(v["config"]["seed"], 1);
    for name in ["gauss-lyapunov", "idelta-khinchine", "liouville-extremality"] {
        let p = format!("{}/presets/{name}.toml", env!("CARGO_MANIFEST_DIR"));
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("kind ="), "{name}");
    }
}

#[test]
fn series_experiment_verdicts() {
    let v = json(&["experiment", "series", "--psi", "log:0.7", "--alpha", "0.7"]);
    assert_eq!(v["result"]["weiss"]["verdict"], "diverges");
    assert_eq!(v["result"]["klw"]["verdict"], "converges");
    assert_eq!(v["result"]["condensed"]["verdict"], "diverges");
}

#[test]
fn decay_experiment_reports_non_decay() {
    let v = json(&["experiment", "decay", "--family", "geometric:2", "--n-from", "3", "--n-to", "5", "--samples", "100000"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["non_decay"] == true));
}
