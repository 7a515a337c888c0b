mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hmass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmass")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> String {
    common::data(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn eval_prints_mass_and_phi() {
    let o = hmass(&["eval", &data("unit_segment_theta4.json"), "--h", "power:0.5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "mass=4.0 phi_h=2.0");
    let o = hmass(&["eval", &data("unit_segment_theta4.json"), "--h", &data("h_power_half.json"), "--out", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["phi_h"], 2.0);
}

#[test]
fn counterexample_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let o = hmass(&["counterexample", "--h", "power:0.5", "--i-max", "4", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("i,"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn relax_passes_and_reports_verdict() {
    let o = hmass(&["relax", &data("quarter_circle.json"), "--h", "abs", "--eps", "0.01"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("verdict,pass") && text.contains("lsc,pass"));
}

#[test]
fn relax_budget_exit_code() {
    let o = hmass(&["relax", &data("quarter_circle.json"), "--h", "abs", "--eps", "1e-12"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn approx_writes_a_loadable_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = hmass(&["approx", &data("parabola.json"), "--h", "abs", "--eps", "0.02", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let e = hmass(&["eval", out.to_str().unwrap(), "--h", "abs"]);
    assert!(e.status.success());
    let cert: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(cert["flat_upper"].as_f64().unwrap() <= 0.02);
}

#[test]
fn malformed_input_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(hmass(&["eval", &bad, "--h", "abs"]).status.code(), Some(2));
    assert_eq!(hmass(&["eval", &data("unit_segment_theta4.json"), "--h", "power:x"]).status.code(), Some(2));
    assert_eq!(hmass(&["eval", "/nonexistent/chain.json", "--h", "abs"]).status.code(), Some(2));
}

#[test]
fn overlapping_triangles_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(
        dir.path(),
        "overlap.json",
        r#"{"ambient_dim": 2, "dim": 2, "terms": [
            {"vertices": [[0, 0], [1, 0], [0, 1]], "multiplicity": 1},
            {"vertices": [[0.2, 0], [1.2, 0], [0.2, 1]], "multiplicity": 1}]}"#,
    );
    assert_eq!(hmass(&["eval", &chain, "--h", "abs"]).status.code(), Some(3));
}

#[test]
fn flat_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let dipole = write(
        dir.path(),
        "dipole.json",
        r#"{"ambient_dim": 2, "dim": 0, "terms": [
            {"vertices": [[0, 0]], "multiplicity": 1}, {"vertices": [[0.5, 0]], "multiplicity": -1}]}"#,
    );
    let o = hmass(&["flat", "zero", &dipole, "--out", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let o = hmass(&["flat", "upper", &data("unit_segment_theta4.json"), "--level", "1", "--out", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    assert!(v["certificate"]["lp_status"].is_string());

    let o = hmass(&["flat", "dist", &data("quarter_circle.json"), &data("unit_segment_theta4.json"), "--out", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn slice_on_axes() {
    let o = hmass(&["slice", &data("unit_segment_theta4.json"), "--y", "0.5", "--out", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["atoms"].as_array().unwrap().len(), 1);
    assert_eq!(v["atoms"][0]["multiplicity"], 4.0);
    let o = hmass(&["slice", &data("unit_segment_theta4.json"), "--y", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn intgeo_is_seeded() {
    let args = ["intgeo", &data("unit_segment_theta4.json"), "--h", "abs", "--samples", "2000", "--seed", "5"];
    let a = stdout(&hmass(&args));
    let b = stdout(&hmass(&args));
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"seed": 5}"#);
    let c = stdout(&hmass(&["intgeo", &data("unit_segment_theta4.json"), "--h", "abs", "--samples", "2000", "--config", &cfg]));
    assert_eq!(a, c);
}

#[test]
fn intgeo_calibrated_json() {
    let o = hmass(&["intgeo", &data("unit_segment_theta4.json"), "--h", "abs", "--samples", "20000", "--calibrate", "--out", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cal = v["estimate"]["calibrated"].as_array().unwrap();
    let (value, se) = (cal[0].as_f64().unwrap(), cal[1].as_f64().unwrap());
    assert!((value - 4.0).abs() <= 4.0 * se);
}

#[test]
fn lsc_check_runs() {
    let o = hmass(&["lsc-check", "--random", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 3 + 5);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(hmass(&["frobnicate"]).status.code(), Some(2));
}
