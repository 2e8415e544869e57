use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn eqmet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqmet")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn manifest(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().next().expect("manifest line")).expect("manifest is JSON")
}

#[test]
fn qfi_of_three_sector_state() {
    let out = eqmet(&["qfi", "--state", config("es3.json").to_str().unwrap(), "--oracle"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["F"], 14.0);
    assert!(v["relative_discrepancy"].as_f64().unwrap() < 1e-12);
    let m = manifest(&out);
    assert_eq!(m["command"], "qfi");
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert!(m["seed"].is_null());
}

#[test]
fn parity_prep_of_sector_eigenstate() {
    let shots = 10_000.0;
    let out =
        eqmet(&["parity-prep", "--state", config("up1.json").to_str().unwrap(), "--shots", "10000", "--seed", "3"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let freq = v["freq_plus"].as_f64().unwrap();
    assert!((freq - 0.5).abs() * shots <= 5.0 * (shots * 0.25f64).sqrt());
    assert_eq!(v["F_before"].as_f64().unwrap(), 0.0);
    assert!((v["F_bar"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(manifest(&out)["seed"], 3);
}

#[test]
fn parity_prep_leaves_equatorial_state_unchanged() {
    let out = eqmet(&["parity-prep", "--state", config("es3.json").to_str().unwrap(), "--shots", "100", "--seed", "1"]);
    let v = stdout_json(&out);
    assert!((v["F_bar"].as_f64().unwrap() - v["F_before"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn parity_prep_of_maximally_mixed_state() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("branches.csv");
    let out = eqmet(&[
        "parity-prep",
        "--state",
        config("mixed_sz2.json").to_str().unwrap(),
        "--shots",
        "500",
        "--seed",
        "9",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!((stdout_json(&out)["F_bar"].as_f64().unwrap() - 8.0 / 3.0).abs() < 1e-9);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("branch,probability,frequency,qfi\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn estimate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = eqmet(&[
            "estimate",
            "--config",
            config("estimate.json").to_str().unwrap(),
            "--trials",
            "300",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        (std::fs::read(path).unwrap(), manifest(&out))
    };
    let (a, ma) = run("a.csv");
    let (b, mb) = run("b.csv");
    assert_eq!(a, b);
    assert_eq!(ma["config_digest"], mb["config_digest"]);
    assert!(String::from_utf8(a).unwrap().starts_with("trial,theta_hat\n"));

    let other = eqmet(&["estimate", "--config", config("estimate.json").to_str().unwrap(), "--trials", "301"]);
    assert_ne!(manifest(&other)["config_digest"], ma["config_digest"]);
}

#[test]
fn estimate_with_empirical_weights() {
    let out = eqmet(&[
        "estimate",
        "--config",
        config("estimate.json").to_str().unwrap(),
        "--trials",
        "200",
        "--empirical-weights",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!((v["mean"].as_f64().unwrap() - 0.1).abs() < 1e-3);
}

#[test]
fn interferometer_writes_counts() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let out = eqmet(&[
        "interferometer",
        "--config",
        config("ni.json").to_str().unwrap(),
        "--nu",
        "10000",
        "--seed",
        "7",
        "--out",
        counts.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["input_parity"].as_f64().unwrap() > 0.999);
    let err = (v["theta_hat"].as_f64().unwrap() - 0.05).abs();
    assert!(err < 4.0 * v["crb_sigma"].as_f64().unwrap());
    let text = std::fs::read_to_string(counts).unwrap();
    assert!(text.starts_with("sector,parity,count\n"));
    let total: u64 = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 10_000);
}

#[test]
fn interferometer_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"N":4,"chi":1,"bx_max":10,"ramp_time":100,"steps":1000,"bz":0,"dt_encode":0}"#).unwrap();
    let out = eqmet(&["interferometer", "--config", bad.to_str().unwrap(), "--nu", "10", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bx_max"));

    let fast = dir.path().join("fast.json");
    std::fs::write(&fast, r#"{"N":4,"chi":1,"bx_max":80,"ramp_time":10,"steps":1000,"bz":0,"dt_encode":0}"#).unwrap();
    let out = eqmet(&["interferometer", "--config", fast.to_str().unwrap(), "--nu", "10", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("adiabatic"));
}

#[test]
fn dd_sweep_of_toy_model() {
    let out = eqmet(&["dd", "--tau-list", "0.1,0.05,0.025", "--T", "1.0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tau,parity_deviation,trace_distance_to_effective"));
    let dist: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(dist.len(), 3);
    assert!(dist.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn dd_rejects_odd_pulse_count() {
    let out = eqmet(&["dd", "--tau-list", "0.2", "--T", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ancilla_check_passes() {
    let out = eqmet(&["ancilla-check", "--N", "4"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["parity_identity_deviation"].as_f64().unwrap() < 1e-8);
    assert!(v["cx_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(eqmet(&["qfi", "--bogus"]).status.code(), Some(2));
    assert_eq!(eqmet(&["teleport"]).status.code(), Some(2));
    assert_eq!(eqmet(&["qfi", "--state", "/does/not/exist.json"]).status.code(), Some(2));
}
