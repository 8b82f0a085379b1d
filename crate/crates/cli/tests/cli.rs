use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler-cone")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn catalog_lists_every_builtin() {
    let o = run(&["catalog", "list", "--format", "jsonl"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(names, finsler_cone::models::BUILTIN_NAMES);
    let d = json(&run(&["catalog", "describe", "ads"]));
    assert_eq!(d["name"], "ads");
}

#[test]
fn classify_boundary_exit_codes() {
    let o = run(&["--model", "ads_conformal", "classify-boundary", "--count", "8", "--times", "0,1.3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert!(r["summary"]["max_abs_ii"].as_f64().unwrap() <= 1e-6);

    let half = run(&["--model", "minkowski", "--params", r#"{"region":{"kind":"half_space"}}"#, "classify-boundary"]);
    assert_eq!(half.status.code(), Some(0));

    let dumbbell = r#"{"region":{"kind":"cassini","a":1.0,"c":1.1}}"#;
    let o = run(&["--model", "minkowski", "--params", dumbbell, "classify-boundary", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.starts_with("direction_index,ii,"));
    assert!(text.contains("strictly_concave"));
}

#[test]
fn model_files_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.json");
    std::fs::write(
        &path,
        r#"{"name": "disk", "dim": 3, "builtin": "minkowski", "params": {"n": 2, "region": {"kind": "ball", "radius": 2.0}}}"#,
    )
    .unwrap();
    let o = run(&["--model", path.to_str().unwrap(), "classify-boundary"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["model"], "disk");
}

#[test]
fn shoot_writes_jsonl_trajectories() {
    let o = run(&["--model", "minkowski", "shoot", "--point", "0,0,0", "--velocity", "1,1,0", "--t-max", "2"]);
    assert!(o.status.success());
    let rows: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let last = rows.last().unwrap();
    assert_eq!(last["t"].as_f64(), Some(2.0));
    assert!((last["x"][1].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("parameter_end"));

    let o = run(&["--model", "cylinder_strip", "shoot", "--point", "0,0", "--velocity", "1,1", "--format", "json"]);
    let sol = json(&o);
    assert_eq!(sol["termination"], "boundary_hit");
    assert!((sol["boundary_hit"]["point"][1].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn verify_paper_subset_and_forced_failures() {
    let o = run(&["verify-paper", "--only", "ads", "--format", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 7);

    let o = run(&["verify-paper", "--only", "ads", "--tol", "1e-20"]);
    assert_eq!(o.status.code(), Some(2));
    let report = json(&o);
    assert!(report["failed"].as_u64().unwrap() > 0);
    let stderr = String::from_utf8_lossy(&o.stderr);
    for line in stderr.lines() {
        let d: Value = serde_json::from_str(line).unwrap();
        assert_eq!(d["level"], "fail");
        assert!(d["check"].as_str().unwrap().starts_with("ads."));
    }
    assert_eq!(stderr.lines().count() as u64, report["failed"].as_u64().unwrap());

    assert_eq!(run(&["verify-paper", "--only", "nope"]).status.code(), Some(1));
}

#[test]
fn verify_paper_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for p in &paths {
        let o = run(&["verify-paper", "--only", "theorem1", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let (a, b) = (std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let seq = run(&["verify-paper", "--only", "theorem1", "--seed", "11", "--jobs", "1"]);
    assert_eq!(seq.stdout, a);
}

#[test]
fn nonhausdorff_certificate_or_none() {
    let o = run(&["--model", "product_cone_surface", "detect-nonhausdorff"]);
    assert!(o.status.success());
    let cert = json(&o);
    assert_eq!(cert["model"], "product_cone_surface");
    assert!(cert["evidence"].as_array().unwrap().len() >= 2);

    let o = run(&["--model", "minkowski", "detect-nonhausdorff"]);
    assert!(o.status.success());
    assert_eq!(json(&o), Value::String("none".into()));

    assert_eq!(run(&["--model", "ads", "detect-nonhausdorff"]).status.code(), Some(1));
}

#[test]
fn lightspace_and_fermat_commands() {
    let o = run(&["--model", "cylinder_strip", "sample-lightspace", "--grid", "-0.5;0;0.5", "--dirs", "2", "--format", "jsonl"]);
    assert!(o.status.success());
    let rows: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 12);
    let classes: std::collections::BTreeSet<u64> = rows.iter().map(|r| r["class"].as_u64().unwrap()).collect();
    assert_eq!(classes.len(), 6);

    let o = run(&["--model", "stationary", "fermat-probe", "--count", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "convex");
}

#[test]
fn errors_are_json_on_stderr() {
    let o = run(&["--model", "nope", "classify-boundary"]);
    assert_eq!(o.status.code(), Some(1));
    let d: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(d["level"], "error");
}
