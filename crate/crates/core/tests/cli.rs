use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan-reps")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn roots_of_b2_give_four_rows() {
    let out = run(&["roots", "--datum", "B2", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "k,beta,height");
    assert_eq!(lines[3], "3,\"(1,2)\",3");
}

#[test]
fn cluster_match_on_b2() {
    let out = run(&["cluster-match", "--datum", "B2", "--format", "table"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("cluster-match: 4/4 matched"));
}

#[test]
fn non_dynkin_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("affine.json");
    std::fs::write(&path, r#"{"C": [[2, -2], [-2, 2]], "D": [1, 1]}"#).unwrap();
    let out = run(&["coxeter-check", "--datum", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not of Dynkin type"));
}

#[test]
fn datum_file_with_orientation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g2.json");
    std::fs::write(&path, r#"{"C": [[2, -1], [-3, 2]], "D": [3, 1], "Omega": [[2, 1]]}"#).unwrap();
    let out = run(&["homext-table", "--datum", path.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1 + 36);
}

#[test]
fn bad_inputs_are_usage_errors() {
    assert_eq!(run(&["roots", "--datum", "Q7"]).status.code(), Some(2));
    assert_eq!(run(&["roots", "--datum", "B2", "--omega", "1,2;2,1"]).status.code(), Some(2));
    assert_eq!(run(&["fpoly", "--datum", "A2", "--prime-set", "5,9"]).status.code(), Some(2));
    let unseeded = run(&["serre-check", "--datum", "B2"]);
    assert_eq!(unseeded.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unseeded.stderr).contains("--seed"));
}

#[test]
fn randomized_output_is_reproducible() {
    let args = ["pi-check", "--datum", "B2", "--seed", "7", "--pairs", "10", "--crystal", "3", "--workers", "2"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let parsed: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(parsed["passed"], true);
}

#[test]
fn fpoly_writes_counting_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fpoly", "--datum", "B2", "--results-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["details"]["entries"].as_array().unwrap().len(), 4);
    let transcripts: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fpoly_counts.json")).unwrap()).unwrap();
    let first = &transcripts[0]["grassmannians"][0]["samples"][0];
    assert_eq!(first["prime"], 5);
}

#[test]
fn frozen_fixture_passes_pi_check() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/noserre_b2.json");
    let out = run(&["pi-check", "--datum", "B2", "--seed", "1", "--pairs", "5", "--crystal", "2", "--fixture", fixture]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = report["details"].as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"noserre-fixture"));
}
