use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn focklab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focklab"))
        .current_dir(dir)
        .args(args)
        .env_remove("FOCKLAB_MAX_RADIUS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

#[test]
fn norm_of_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "one.json", r#"{"p": [[1, 0]], "q": []}"#);
    let out = focklab(dir.path(), &["norm", "--symbol", "one.json", "--alpha", "1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out)["result"]["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-8);
}

#[test]
fn cubic_volterra_into_infinity_is_unbounded() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "vg.json", r#"{"kind": "Vg", "g": {"p": [[0,0],[0,0],[0,0],[1,0]], "q": []}}"#);
    let out = focklab(dir.path(), &["classify", "--op", "vg.json", "--source", "2", "--target", "inf", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["bounded"], "no");
    assert_eq!(r["result"]["agree"], true);
    assert!(!r["anchor"].as_str().unwrap().is_empty());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = focklab(dir.path(), &["norm", "--symbol", "missing.json", "--alpha", "1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    write(dir.path(), "bad.json", r#"{"p": "nope"}"#);
    let out = focklab(dir.path(), &["norm", "--symbol", "bad.json", "--alpha", "1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    write(dir.path(), "one.json", r#"{"p": [[1, 0]], "q": []}"#);
    let out = focklab(dir.path(), &["norm", "--symbol", "one.json", "--alpha", "0", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = focklab(dir.path(), &["norm", "--symbol", "one.json", "--alpha", "1", "--p", "two"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_and_written_to_files() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", r#"{"p": [[0,0],[0,0],[1,0]], "q": []}"#);
    let args = ["transform", "--kind", "binf", "--g", "g.json", "--alpha", "1", "--radii", "5", "--out", "a.json", "--csv", "a.csv"];
    assert_eq!(focklab(dir.path(), &args).status.code(), Some(0));
    let mut again = args;
    again[10] = "b.json";
    again[12] = "b.csv";
    assert_eq!(focklab(dir.path(), &again).status.code(), Some(0));
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("radius,value\n"));
    assert_eq!(csv.lines().count(), 7);
    let r: Value = serde_json::from_slice(&a).unwrap();
    let sup = r["result"]["verdict_inputs"]["sup"].as_f64().unwrap();
    assert!((sup - 2.0).abs() < 1e-4);
}

#[test]
fn carleson_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{"kind": "exppoly_power", "base": {"p": [[1,0]], "q": []}, "power": 1, "gauss": 1}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_focklab"))
        .current_dir(dir.path())
        .args(["carleson", "--measure", "m.json", "--p", "2", "--alpha", "1"])
        .env("FOCKLAB_MAX_RADIUS", "55")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "carleson");
    assert_eq!(r["quadrature"]["max_radius"], 55.0);
}

#[test]
fn verify_subset() {
    let dir = tempfile::tempdir().unwrap();
    let out = focklab(dir.path(), &["verify", "--suite", "all", "--seed", "7", "--only", "quadrature"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["checks"].as_array().unwrap().len(), 1);
    assert_eq!(r["result"]["all_passed"], true);
    let out = focklab(dir.path(), &["verify", "--only", "no_such_check"]);
    assert_eq!(out.status.code(), Some(2));
}
