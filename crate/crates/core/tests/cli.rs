use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sta-expansion")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn design_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["design", "--out", path(d), "--tau-f", "6", "--units", "dimensionless"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["protocol.json", "control.csv", "trajectory.csv"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    assert!(a.join("run.log").exists());
}

#[test]
fn too_short_duration_exits_two_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["design", "--out", path(dir.path()), "--tau-f", "3", "--units", "dimensionless"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().find(|l| l.trim_start().starts_with('{')).expect("json error line");
    let err: Value = serde_json::from_str(line).unwrap();
    assert_eq!(err["error"], "infeasible-duration");
    assert_eq!(err["exit_code"], 2);
    assert!(line.contains("3.08798"), "{line}");
    assert!(out.stdout.is_empty());
}

#[test]
fn duration_needs_units() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["design", "--out", path(dir.path()), "--tau-f", "6"]);
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(2));
}

#[test]
fn validate_passes_on_defaults_and_rejects_overlapping_segments() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("design");
    assert!(run(&["design", "--out", path(&d)]).status.success());

    let ok = run(&["validate", "--out", path(&dir.path().join("v1")), "--protocol", path(&d.join("protocol.json"))]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v1/validation.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));

    let mut p: Value = serde_json::from_str(&std::fs::read_to_string(d.join("protocol.json")).unwrap()).unwrap();
    let first_end = p["segments"][0]["end"].as_f64().unwrap();
    p["segments"][1]["start"] = Value::from(first_end - 0.25);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&p).unwrap()).unwrap();
    let out = run(&["validate", "--out", path(&dir.path().join("v2")), "--protocol", path(&bad)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tiling"));
}

#[test]
fn bound_writes_json_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bound", "--out", path(dir.path()), "--format", "json"]);
    assert!(out.status.success());
    let listed = String::from_utf8_lossy(&out.stdout);
    let json = listed.lines().find(|l| l.ends_with(".json")).expect("a json file");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn infeasible_bound_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bound", "--out", path(dir.path()), "--delta", "1e-5"]);
    assert_eq!(out.status.code(), Some(2));
}
