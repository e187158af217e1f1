use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qmacro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmacro")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = qmacro(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qmacro-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn ghz_size_at_zero_delta_is_mode_count() {
    let v = json(&["size", "--state", "ghz", "--modes", "5", "--delta", "0"]);
    assert_eq!(v["report"]["size"]["c_delta"].as_f64().unwrap(), 5.0);
    assert_eq!(v["report"]["size"]["convention"], "orthogonal_branches");
    assert_eq!(v["meta"]["schema_version"], 1);
    assert_eq!(v["meta"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn ecs_size_report() {
    let v = json(&["size", "--state", "ecs", "--alpha", "1", "--modes", "4", "--delta", "0.1"]);
    let s = &v["report"]["size"];
    assert!((s["abs_z"].as_f64().unwrap() - (-2f64).exp()).abs() < 1e-12);
    assert!((s["c_tilde"].as_f64().unwrap() - 16.0).abs() < 1e-9);
    assert_eq!(v["meta"]["truncation"]["converged"], true);
}

#[test]
fn gaussian_size_carries_printed_and_computed_values() {
    let v = json(&["size", "--state", "psi2plus", "--alpha", "0.5", "--xi", "0.3", "--modes", "2", "--delta", "0.1"]);
    let g = &v["report"]["gaussian"];
    assert!((g["printed_over_computed"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!(g["oracle_rel_deviation"].as_f64().unwrap() < 1e-6);
    let c = g["c_tilde"].as_f64().unwrap();
    assert!((v["report"]["size"]["c_tilde"].as_f64().unwrap() - c).abs() < 1e-8);
}

#[test]
fn nrf_examples() {
    let v = json(&["nrf", "--state", "ghz", "--modes", "4", "--algebra", "qubit"]);
    assert!((v["report"]["nrf"]["nrf"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    assert!((v["report"]["time_ratio"]["literal"].as_f64().unwrap() - 4.0).abs() < 1e-9);

    let v = json(&["nrf", "--state", "fockghz", "--n", "4", "--modes", "2", "--algebra", "h4_l1"]);
    // twice the printed closed form 2.1
    assert!((v["report"]["nrf"]["nrf"].as_f64().unwrap() - 4.2).abs() < 1e-9);
}

#[test]
fn qubit_times() {
    let v = json(&["times", "--state", "plus", "--hamiltonian", "sigmaz", "--delta", "0.1"]);
    let r = &v["report"]["report"];
    let expected = 2.0 * 0.8f64.asin() / 2.0;
    assert!((r["tau_dist"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((r["actual_crossing_time"].as_f64().unwrap() - expected).abs() < 1e-8);
    assert_eq!(r["bound_satisfied"], true);
}

#[test]
fn exit_codes() {
    let window = qmacro(&["size", "--state", "ecs", "--alpha", "0.3", "--modes", "4", "--delta", "1e-10"]);
    assert_eq!(window.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&window.stderr).contains("admissible window"));

    let trunc = qmacro(&["--truncation", "6", "size", "--state", "ecs", "--alpha", "1", "--modes", "4"]);
    assert_eq!(trunc.status.code(), Some(3));

    let dir = scratch("capacity");
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, r#"{"tolerances": {"max_dim": 8}}"#).unwrap();
    let cap = qmacro(&["--config", cfg.to_str().unwrap(), "size", "--state", "ghz", "--modes", "5", "--with-checks"]);
    assert_eq!(cap.status.code(), Some(4));

    assert_eq!(qmacro(&["size", "--state", "bogus"]).status.code(), Some(2));
}

#[test]
fn config_file_and_flag_override() {
    let dir = scratch("config");
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"state": {"name": "ecs", "alpha": 1.0, "n_modes": 2}, "delta": 0.05}"#).unwrap();
    let a = json(&["--config", cfg.to_str().unwrap(), "size"]);
    assert_eq!(a["report"]["size"]["delta"].as_f64().unwrap(), 0.05);
    let b = json(&["--config", cfg.to_str().unwrap(), "size", "--delta", "0.2"]);
    assert_eq!(b["report"]["size"]["delta"].as_f64().unwrap(), 0.2);
    assert_ne!(a["meta"]["config_hash"], b["meta"]["config_hash"]);

    std::fs::write(&cfg, r#"{"delat": 0.05}"#).unwrap();
    assert_eq!(qmacro(&["--config", cfg.to_str().unwrap(), "size"]).status.code(), Some(2));
}

#[test]
fn custom_state_from_matrix_file() {
    let dir = scratch("custom");
    // Hadamard-like real unitary on a qubit, interleaved re/im
    let h = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(dir.join("u.csv"), format!("{h},0,{h},0\n{h},0,{},0\n", -h)).unwrap();
    std::fs::write(
        dir.join("run.json"),
        r#"{"state": {"custom": {"phi": [[1,0],[0,0]], "unitary": {"type": "matrix_file", "path": "u.csv"}, "n_modes": 3, "kind": "spin"}}}"#,
    )
    .unwrap();
    let v = json(&["--config", dir.join("run.json").to_str().unwrap(), "size", "--delta", "0.2"]);
    assert!((v["report"]["size"]["abs_z"].as_f64().unwrap() - h).abs() < 1e-12);

    std::fs::write(dir.join("u.csv"), "1,0,1,0\n0,0,1,0\n").unwrap();
    let bad = qmacro(&["--config", dir.join("run.json").to_str().unwrap(), "size"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("not unitary"));
}

#[test]
fn csv_report_format() {
    let out = qmacro(&["--csv", "size", "--state", "ghz", "--modes", "3", "--delta", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l == "report.size.c_delta,3.0"));
}

#[test]
fn gaussian_sweep_is_deterministic_and_complete() {
    let args = ["sweep", "--kind", "gaussian", "--alpha", "0.5", "--xi-range", "0:1:11", "--modes", "1"];
    let a = qmacro(&args);
    let b = qmacro(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 11);
    // computed C̃(Psi0) grows monotonically with ξ
    let psi0: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("psi0,"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert!(psi0.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn nrf_sweep_writes_summary_with_fit() {
    let dir = scratch("sweep");
    let out = dir.join("ecs.csv");
    let r = qmacro(&[
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "--kind",
        "nrf",
        "--state",
        "ecs",
        "--alpha",
        "0.5,1",
        "--modes",
        "2,3,4",
    ]);
    assert!(r.status.success());
    let rows = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows.lines().count(), 7);
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("ecs.csv.summary.json")).unwrap()).unwrap();
    assert!(summary["report"]["fitted_exponent"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["report"]["failed_rows"], 0);
}

#[test]
fn plotdata_emits_quoted_ellipses() {
    let dir = scratch("plot");
    let r = qmacro(&["--out", dir.to_str().unwrap(), "plotdata", "--alpha", "0.5", "--xi", "0.3"]);
    assert!(r.status.success());
    let quoted = std::fs::read_to_string(dir.join("ellipses_quoted.csv")).unwrap();
    let lines: Vec<&str> = quoted.lines().collect();
    assert_eq!(lines[0], "label,cx,cp,semi_u,semi_v,convention");
    assert_eq!(lines.len(), 9);
    let c: Vec<&str> = lines.iter().find(|l| l.starts_with("c_displaced")).unwrap().split(',').collect();
    assert!((c[1].parse::<f64>().unwrap() + 2.0 * 0.5 * 0.3f64.exp()).abs() < 1e-12);
    assert!(dir.join("ellipses_variance.csv").exists());
    assert!(dir.join("c_tilde_curves.csv").exists());
}

#[test]
fn verify_single_criterion() {
    let dir = scratch("verify");
    let r = qmacro(&["--out", dir.to_str().unwrap(), "verify", "--seed", "3", "--criterion", "8"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).starts_with("criterion 8: PASS"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["seed"], 3);
    assert_eq!(qmacro(&["verify", "--criterion", "12"]).status.code(), Some(2));
}
