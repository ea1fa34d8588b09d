//! Runs the `lcmanifold` binary end to end.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lcmanifold"))
}

fn run_in(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.current_dir(dir).args(args);
    match config {
        Some(text) => {
            cmd.args(["--config", "-"])
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::piped());
            let mut child = cmd.spawn().unwrap();
            child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
            child.wait_with_output().unwrap()
        }
        None => cmd.output().unwrap(),
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn manifold_prints_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["manifold", "--out", "res"], None);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("generic") && stdout.contains("closed_form"));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("res/manifold.json"))).unwrap();
    assert!((v["a0"].as_f64().unwrap() + 0.011765).abs() < 5e-7);
    assert!((v["a1"].as_f64().unwrap() - 0.105882).abs() < 5e-7);
    assert!((v["a2"].as_f64().unwrap() - 0.011765).abs() < 5e-7);
    assert!(v["max_disc"].as_f64().unwrap() < 1e-12);
}

#[test]
fn lienard_manifold_from_stdin_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["manifold"],
        Some(r#"{"system": {"kind": "lienard3d", "k": 0, "lambda": 1}}"#),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("manifold.json"))).unwrap();
    for (key, want) in [("a0", 0.2), ("a1", 0.2), ("a2", -0.2)] {
        assert!((v[key].as_f64().unwrap() - want).abs() < 1e-15, "{key}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&run_in(d, &["manifold"], Some(r#"{"system": {"lambda": -1}}"#))),
        2
    );
    assert_eq!(code(&run_in(d, &["manifold"], Some(r#"{"bogus": 1}"#))), 2);
    assert_eq!(code(&run_in(d, &["manifold", "--config", "missing.json"], None)), 2);
    assert_eq!(
        code(&run_in(
            d,
            &["manifold"],
            Some(r#"{"system": {"kind": "lienard3d", "k": -0.5, "lambda": 1}}"#)
        )),
        3
    );
    assert_eq!(
        code(&run_in(d, &["analyze"], Some(r#"{"integrator": {"t_end": 5}}"#))),
        5
    );
    assert_eq!(code(&run_in(d, &["verify"], Some(r#"{"verify": {"lambdas": []}}"#))), 2);
}

#[test]
fn integration_failure_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"integrator": {"initial_state": [50, 0, 0], "t_end": 10, "method": "rk4", "step": 0.5}}"#;
    let o = run_in(dir.path(), &["simulate", "--target", "full3d"], Some(cfg));
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("full3d.csv").exists());
}

#[test]
fn zero_duration_simulation_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"integrator": {"t_end": 0, "initial_state": [0.5, 0.25, -0.125]}}"#;
    assert_eq!(
        code(&run_in(dir.path(), &["simulate", "--target", "full3d"], Some(cfg))),
        0
    );
    let text = read(dir.path().join("full3d.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "t,x,y,z");
    let vals: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(vals, [0.0, 0.5, 0.25, -0.125]);
}

#[test]
fn uncoupled_simulation_reaches_base_radius() {
    let dir = tempfile::tempdir().unwrap();
    let z = "[0, 0, 0, 0, 0, 0]";
    let cfg = format!(r#"{{"system": {{"c": {z}, "d": {z}, "e": {z}}}}}"#);
    assert_eq!(
        code(&run_in(dir.path(), &["simulate", "--target", "polar"], Some(&cfg))),
        0
    );
    let text = read(dir.path().join("polar.csv"));
    assert!(text.starts_with("t,R,theta\n"));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((last[1] / 2.0 - 1.0).abs() < 0.005);
}

#[test]
fn simulate_is_deterministic() {
    for method in ["rk4", "rk45"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = format!(r#"{{"integrator": {{"method": "{method}", "step": 0.01, "t_end": 40}}}}"#);
        for out in ["a", "b"] {
            let o = run_in(
                dir.path(),
                &["simulate", "--target", "full3d", "--out", out],
                Some(&cfg),
            );
            assert_eq!(code(&o), 0);
        }
        assert_eq!(
            read(dir.path().join("a/full3d.csv")),
            read(dir.path().join("b/full3d.csv"))
        );
    }
}

#[test]
fn simulate_then_analyze_matches_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for target in ["reduced2d", "polar", "full3d"] {
        let cfg = r#"{"system": {"lambda": 2}}"#;
        assert_eq!(
            code(&run_in(d, &["simulate", "--target", target, "--out", "sim"], Some(cfg))),
            0
        );
        let csv = d.join(format!("sim/{target}.csv"));
        let a = run_in(
            d,
            &["analyze", "--trajectory", csv.to_str().unwrap(), "--out", "x"],
            Some(cfg),
        );
        let b = run_in(d, &["analyze", "--target", target, "--out", "y"], Some(cfg));
        assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(code(&b), 0);
        assert_eq!(a.stdout, b.stdout, "{target}");
        assert_eq!(read(d.join("x/analysis.json")), read(d.join("y/analysis.json")));
    }
}

#[test]
fn analyze_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["analyze"], None);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["radius_relative_error"].as_f64().unwrap() <= 0.02);
    assert_eq!(v["oscillations_per_cycle"].as_u64(), Some(4));
    assert!((v["predicted_period"].as_f64().unwrap() - 6.43885).abs() < 1e-4);
}

#[test]
fn sweep_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "sweep",
            "--lambda-min",
            "1",
            "--lambda-max",
            "10",
            "--lambda-steps",
            "10",
        ],
        Some(r#"{"sweep": {"lambda_steps": 3}}"#),
    );
    assert_eq!(code(&o), 0);
    let text = read(dir.path().join("sweep.csv"));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), text);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1] && w[1][0] > w[0][0]));
    assert!(rows.iter().all(|r| r[1] > 2.0));
}

#[test]
fn sweep_thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let o = bin()
            .current_dir(dir.path())
            .env("LCMANIFOLD_THREADS", threads)
            .args(["sweep", "--lambda-steps", "4"])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        outputs.push(o.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    let bad = bin()
        .current_dir(dir.path())
        .env("LCMANIFOLD_THREADS", "zero")
        .arg("sweep")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn empty_sweep_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["sweep", "--lambda-steps", "0"], None);
    assert_eq!(code(&o), 0);
    assert_eq!(
        read(dir.path().join("sweep.csv")),
        "lambda,predicted_radius,simulated_radius\n"
    );
}

// With the default couplings at λ = 1 the full system settles to an
// equilibrium, so the full-versus-reduced radius check cannot pass and verify
// exits 1. Every other check passes.
#[test]
fn verify_reports_only_the_full_system_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["verify"], None);
    assert_eq!(code(&o), 1);
    let table = String::from_utf8(o.stdout).unwrap();
    let failing: Vec<&str> = table.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{table}");
    assert!(failing[0].contains("full_vs_reduced_radius") && failing[0].contains("lambda=1"));
}

#[test]
fn verify_passes_without_the_unit_lambda_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["verify"],
        Some(r#"{"verify": {"simulation_lambdas": [2, 5]}}"#),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn doubled_denominator_fails_radius_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["verify", "--debug-doubled-denominator"],
        Some(r#"{"verify": {"simulation_lambdas": [2, 5]}}"#),
    );
    assert_eq!(code(&o), 1);
    let table = String::from_utf8(o.stdout).unwrap();
    for name in ["averaging_oracle", "closed_form_values"] {
        assert!(
            table.lines().any(|l| l.starts_with("FAIL") && l.contains(name)),
            "{table}"
        );
    }
}
