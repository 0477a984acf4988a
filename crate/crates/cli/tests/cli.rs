use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasieig")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn radial_eigenvalue_of_the_unit_disk() {
    let o = run(&["eig-radial", "--dim", "2", "--radius", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lambda = v["lambda"].as_f64().unwrap();
    assert!((lambda - 2.404_825_557_695_773f64.powi(2)).abs() < 1e-6, "{lambda}");
}

#[test]
fn radial_profile_as_csv() {
    let o = run(&["eig-radial", "--dim", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("r,u"));
    assert!(text.lines().count() > 10);
}

#[test]
fn hypothesis_violation_exits_zero() {
    let o = run(&["verify", "cheng", "--curvature", "0", "--manifold-curvature", "-1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["verdict"], "hypothesis-violated");
}

#[test]
fn unsupported_closed_manifold_exits_three() {
    let o = run(&["verify", "corollary12", "--curvature", "-1", "--diameter", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_flags_exit_nonzero() {
    assert_eq!(run(&["eig-radial", "--p", "0.5"]).status.code(), Some(3));
    assert_eq!(run(&["eig-radial", "--bogus"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["eig-radial", "--dim", "2", "--radius", "-1"]).status.code(), Some(3));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn empty_and_malformed_suites() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.json", r#"{"cases": []}"#);
    let out = dir.path().join("out");
    let o = run(&["run-suite", &empty, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("report.json").exists());
    assert_eq!(std::fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 1);

    let bad = write(dir.path(), "bad.json", r#"{"cases": [{"theorem": "cheng"}]}"#);
    let o = run(&["run-suite", &bad]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

const SMALL: &str = r#"{"seed": 5, "cases": [
  {"theorem": "cheng", "dim": 2, "model_curvature": 0.0,
   "manifold": {"kind": "space-form", "curvature": 1.0}, "r0": 1.0,
   "exponents": {"p": 2.0, "q": 3.0, "alpha": 1.0, "beta": 1.5}},
  {"theorem": "corollary12", "dim": 2, "curvature": 1.0},
  {"theorem": "cheeger-bound", "domain": {"kind": "radial-ball", "dim": 1, "curvature": 0.0, "radius": 1.0},
   "ladder": [2.0, 1.5]}
]}"#;

#[test]
fn suite_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "small.json", SMALL);
    let summaries: Vec<String> = ["1", "2"]
        .iter()
        .map(|workers| {
            let out = dir.path().join(format!("out{workers}"));
            let o = run(&["run-suite", &config, "--out", out.to_str().unwrap(), "--workers", workers]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            std::fs::read_to_string(out.join("summary.csv")).unwrap()
        })
        .collect();
    assert_eq!(summaries[0], summaries[1]);
    assert_eq!(summaries[0].lines().count(), 4);
}

#[test]
fn shipped_default_suite_matches_builtin() {
    let o = run(&["run-suite", "--print-default"]);
    assert_eq!(o.status.code(), Some(0));
    let shipped = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../suites/default.json")).unwrap();
    let a: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&shipped).unwrap();
    assert_eq!(a, b);
}
