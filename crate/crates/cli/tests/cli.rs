use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperlinear"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn approx_rep_relation_error_within_bound() {
    let v = json(&["approx-rep", "--n", "16"]);
    let err = v["relation_error"].as_f64().unwrap();
    assert!(err <= 0.5, "{err}");
    assert_eq!(v["dim"], 96);
}

#[test]
fn word_normalize_example() {
    let v = json(&["word", "--normalize", "a^-2 b^2 a^2"]);
    assert_eq!(v["output"], "b^3 a^-1 b a");
    assert_eq!(v["equal"], true);
    assert_eq!(v["a13"]["satisfied"], true);
    let v = json(&["word", "--reduce", "a b^3 a^-1 b^-2"]);
    assert_eq!(v["output"], "");
    assert_eq!(v["is_identity"], true);
}

#[test]
fn relator_trace_matches_closed_form() {
    // τ(a₁ v b³ v* a₁⁻¹ b⁻²) = (2 + 2ω + ω⁻⁴ + ω⁻¹)/6 with ω = exp(2πi/24).
    let v = json(&["trace", "--word", "a b^3 a^-1 b^-2", "--n", "4", "--mc-samples", "200", "--seed", "3"]);
    assert_eq!(v["is_identity"], true);
    let t = std::f64::consts::TAU / 24.0;
    let re = (2.0 + 2.0 * t.cos() + (4.0 * t).cos() + t.cos()) / 6.0;
    let im = (2.0 * t.sin() - (4.0 * t).sin() - t.sin()) / 6.0;
    assert!((v["tau_re"].as_f64().unwrap() - re).abs() < 1e-12);
    assert!((v["tau_im"].as_f64().unwrap() - im).abs() < 1e-12);
    assert_eq!(v["monte_carlo"]["within_3_std_err"], true);
}

#[test]
fn optimize_from_file_with_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("a.json");
    std::fs::write(&coeffs, "[[0, 1], [1, 0]]").unwrap();
    let traj = dir.path().join("t.csv");
    let v = json(&[
        "optimize",
        "--n",
        "2",
        "--dim",
        "3",
        "--coeffs",
        coeffs.to_str().unwrap(),
        "--restarts",
        "4",
        "--seed",
        "2",
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert!((v["objective"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["brute_force"], 1.0);
    assert_eq!(v["kkt"]["passed"], true);
    let csv = std::fs::read_to_string(traj).unwrap();
    assert!(csv.starts_with("sweep,index,objective\n"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn optimize_inline_negative_coefficients() {
    let v = json(&["optimize", "--n", "2", "--dim", "2", "--coeffs", "-1,3,-1"]);
    let obj = v["objective"].as_f64().unwrap();
    assert!(obj >= v["brute_force"].as_f64().unwrap() - 1e-6);
}

#[test]
fn hull_rejects_with_certificate() {
    let v = json(&["hull", "--n", "2", "--lambda", "0.5,0.5,0.25"]);
    assert_eq!(v["member"], false);
    assert!(v["certificate"]["margin"].as_f64().unwrap() > 0.0);
    let v = json(&["moments", "hull", "--n", "2", "--lambda", "0.5,0.25,0.5"]);
    assert_eq!(v["member"], true);
    let total: f64 = v["weights"].as_array().unwrap().iter().map(|w| w["weight"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn moments_csv_and_json() {
    let out = run(&["moments", "unitary", "--n", "2", "--dim", "3", "--p", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,re,im");
    assert_eq!(lines.len(), 1 + 2 + 4);
    assert_eq!(lines[2].split(',').next(), Some("1 1"));
    let mantissa = lines[1].split(',').nth(1).unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);

    let v = json(&["moments", "projection", "--n", "3", "--dim", "4", "--seed", "9"]);
    assert_eq!(v["moments"].as_array().unwrap().len(), 6);
    assert!(v["invariant_violations"].as_array().unwrap().is_empty());
    let v = json(&["moments", "unitary", "--n", "1", "--dim", "2", "--p", "3", "--augment"]);
    assert_eq!(v["n"], 2);
    assert_eq!(v["moments"].as_array().unwrap().len(), 2 + 4 + 8);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["moments", "projection", "--n", "3", "--dim", "5", "--seed", "11"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["optimize", "--n", "3", "--dim", "3", "--coeffs", "1,-1,0.5,1,-2,0.3", "--seed", "4"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 4, "p_max": 2}"#).unwrap();
    let v = json(&["approx-rep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v["n"], 4);
    assert_eq!(v["p_max"], 2);
    let v = json(&["--config", cfg.to_str().unwrap(), "approx-rep", "--n", "8"]);
    assert_eq!(v["n"], 8);
    assert_eq!(v["p_max"], 2);
    std::fs::write(&cfg, r#"{"coeffs": [0, 1, 0], "dim": 2}"#).unwrap();
    let v = json(&["optimize", "--config", cfg.to_str().unwrap(), "--n", "2"]);
    assert!((v["objective"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn output_file_and_thread_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = bin()
        .env("HYPERLINEAR_THREADS", "1")
        .args(["optimize", "--n", "2", "--dim", "2", "--coeffs", "1,1,1", "--output", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!((v["objective"].as_f64().unwrap() - 3.0).abs() < 1e-10);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["approx-rep"][..],
        &["nonsense"],
        &["trace", "--word", "a c", "--n", "2"],
        &["optimize", "--n", "2", "--dim", "2", "--coeffs", "1,2"],
        &["word", "--normalize", "a", "--reduce", "b"],
        &["approx-rep", "--n", "2", "--format", "csv"],
        &["suite", "--only", "42"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn suite_exit_codes_follow_verdicts() {
    let out = run(&["suite", "--deterministic", "--only", "1,9"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v.get("generated_at_unix").is_none());
    assert!(String::from_utf8_lossy(&out.stderr).contains("criterion  9 tangent probe"));

    // The sup-norm expectation check fails for every finite order.
    let out = run(&["suite", "--only", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["failing"], serde_json::json!([3]));
    assert!(v["generated_at_unix"].is_u64());
    assert!(String::from_utf8_lossy(&out.stderr).contains("failing criteria: 3"));
}

#[test]
fn deterministic_suite_is_reproducible() {
    let first = run(&["suite", "--deterministic", "--seed", "7"]);
    let second = run(&["suite", "--deterministic", "--seed", "7"]);
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["criteria"].as_array().unwrap().len(), 10);
}
