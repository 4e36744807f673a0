use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use drsim::harness::parse_series_csv;

const SHORT: &str = r#"
schema_version = 1

[trajectory]
kind = "sinusoidal"
amplitude_m = 5.0
angular_rate_rad_per_s = 1.0
drift_velocity_m_per_s = 1.0

[policy]
kind = "fixed"
th_pos_m = 0.5

[network]
base_delay_ms = 50.0
jitter = "uniform"
jitter_ms = 10.0

[run]
duration_s = 20.0
seed = 3
"#;

fn drsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drsim")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_prints_summary_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", SHORT);
    let out = drsim(&["run", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("packets_sent"));

    let csv = dir.path().join("a.csv");
    let out = drsim(&["--csv", "--out", s(&csv), "run", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let rows = parse_series_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 2001);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", SHORT);
    let a = drsim(&["--csv", "--seed", "3", "run", s(&cfg)]).stdout;
    let b = drsim(&["--csv", "run", s(&cfg)]).stdout;
    let c = drsim(&["--csv", "--seed", "4", "run", s(&cfg)]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn qos_strict_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let slow = SHORT.replace("base_delay_ms = 50.0", "base_delay_ms = 150.0");
    let cfg = write(dir.path(), "slow.toml", &slow);
    assert_eq!(drsim(&["run", s(&cfg)]).status.code(), Some(0));
    let out = drsim(&["run", "--qos-strict", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("latency"));
    let ok = write(dir.path(), "ok.toml", SHORT);
    assert_eq!(drsim(&["run", "--qos-strict", s(&ok)]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &SHORT.replace("duration_s = 20.0", "duration_s = -1.0"));
    let out = drsim(&["run", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.duration_s") && err.contains("line"), "{err}");
    assert_eq!(drsim(&["run", "/nonexistent/x.toml"]).status.code(), Some(2));
    let out = drsim(&["compare", s(&write(dir.path(), "a.toml", SHORT)), "--policies", "fixed:0.5,bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_sorts_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", SHORT);
    let out = drsim(&["--csv", "compare", s(&cfg), "--policies", "fixed:1.0,fixed:0.1,aoi,sr"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let errs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(errs.len(), 4);
    assert!(errs.windows(2).all(|w| w[0] <= w[1]));
    assert!(text.lines().nth(1).unwrap().starts_with("fixed:0.1"));
}

#[test]
fn train_then_compare_with_network_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", &format!("{SHORT}\n[anfis]\ncandidates_m = [0.1, 0.3, 0.5]\n"));
    let out = drsim(&["train-anfis", s(&cfg), "--epochs", "5", "--eta", "0.02", "--out", s(&dir.path().join("net.toml"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = drsim(&["compare", s(&cfg), "--policies", "anfis:net.toml,fixed:0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("anfis:net.toml"));
}

#[test]
fn validate_bound_and_grad_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", SHORT);
    let out = drsim(&["validate-bound", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("within_bound true"));
    let out = drsim(&["--seed", "5", "grad-check"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let dev: f64 = text.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(dev < 1e-4);
}
