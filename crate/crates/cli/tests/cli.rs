//! End-to-end runs of the `qprym` binary: exit codes and output shape.

use std::process::{Command, Output};

fn qprym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprym")).args(args).output().expect("spawn qprym")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn seven_points_is_a_usage_error() {
    let out = qprym(&["verify", "--points", "0,1,2,3,4,5,6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("8 branch points"));
}

#[test]
fn unordered_points_are_rejected() {
    let out = qprym(&["periods", "--points=-1,0,2,1,3,4,5,6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_errors_are_usage_errors() {
    let dir = std::env::temp_dir().join(format!("qprym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let short = dir.join("short.toml");
    std::fs::write(&short, "points = [1, 2, 3, 4, 5, 6, 7]\n").unwrap();
    assert_eq!(qprym(&["map", "--config", short.to_str().unwrap()]).status.code(), Some(2));
    let unknown = dir.join("unknown.json");
    std::fs::write(&unknown, r#"{"pionts": [1, 2]}"#).unwrap();
    assert_eq!(qprym(&["periods", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn corrupted_u_fails_the_lattice_suite() {
    let out = qprym(&["verify", "--suite", "lattice", "--corrupt-u"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["passed"], false);
    assert_eq!(r["criteria"][0]["criterion"], 2);
}

#[test]
fn full_verify_passes() {
    let out = qprym(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["criteria"].as_array().unwrap().len(), 9);
}

#[test]
fn enum_lists_pairings_and_splits() {
    let out = qprym(&["enum"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 105);
    let out = qprym(&["enum", "--shape", "44", "--json"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["rows"].as_array().unwrap().len(), 35);
}

#[test]
fn enum_json_rows_are_distinct_pairings() {
    let r = json(&qprym(&["enum", "--json"]));
    let rows = r["rows"].as_array().unwrap();
    let mut names: Vec<&str> = rows.iter().map(|row| row["partition"].as_str().unwrap()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), 105);
}

#[test]
fn periods_report_is_consistent() {
    let out = qprym(&["periods", "--points=-3,-2,-1,0,1,2,3,4.5", "--precision", "extended"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["checks"]["tau_symmetric"], true);
    assert_eq!(r["checks"]["im_tau_positive"], true);
    assert!(r["checks"]["rho_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["tau1"].as_array().unwrap().len(), 6);
}

#[test]
fn theta_accepts_explicit_characteristics() {
    let out = qprym(&["theta", "--char", "1/2,0,0,0,0,0,0,0,0,0,0,1/2"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["quadruple"].as_array().unwrap().len(), 4);
    assert!(r["cross_ratio"]["residual"].as_f64().unwrap() < 1e-10);
    assert!(r["characteristics"][0]["tail_bound"].as_f64().unwrap() <= 1e-12);
    assert_eq!(qprym(&["theta", "--char", "1,2"]).status.code(), Some(2));
}

#[test]
fn map_passes_at_the_default_points() {
    let out = qprym(&["map"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["entries"].as_array().unwrap().len(), 105);
    assert!(r["max_residual"].as_f64().unwrap() < 1e-5);
}
