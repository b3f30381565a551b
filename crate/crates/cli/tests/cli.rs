use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sktsp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sktsp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sktsp(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn example1_has_56_items() {
    let dir = tempfile::tempdir().unwrap();
    let summary = ok(dir.path(), &["gen", "example1", "--l", "7", "--out", "e1.json"]);
    assert!(summary.contains("items=56 k=128"), "{summary}");
    let inst = json(&std::fs::read_to_string(dir.path().join("e1.json")).unwrap());
    assert_eq!(inst["k"], "128");
    assert_eq!(inst["rewards"].as_array().unwrap().len(), 57);
    assert_eq!(inst["manifest"]["command"], "gen");
}

#[test]
fn adaptive_on_example1_pays_at_least_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "example1", "--l", "7", "--out", "e1.json"]);
    let rep = json(&ok(dir.path(), &["run", "--instance", "e1.json", "--trials", "10"]));
    assert!(rep["summary"]["mean"].as_f64().unwrap() >= 112.0);
}

#[test]
fn gap_instance_optima() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "gap", "--n", "2", "--out", "g.json"]);
    let inst = json(&std::fs::read_to_string(dir.path().join("g.json")).unwrap());
    assert_eq!(inst["rewards"][1]["probs"], serde_json::json!(["1/2", "1/2"]));
    let rep = json(&ok(dir.path(), &["opt", "--instance", "g.json"]));
    assert_eq!(rep["adaptive"], "3/2");
    assert_eq!(rep["nonadaptive"], "2");
}

#[test]
fn gaplp_n2() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["--format", "csv", "gaplp", "--n", "2"]);
    assert!(out.contains("2,1.3333"), "{out}");
    let rep = json(&ok(dir.path(), &["gaplp", "--max-n", "3"]));
    assert_eq!(rep["table"][2]["exact_value"], "3/2");
}

#[test]
fn nonadaptive_two_leaf_star() {
    let dir = tempfile::tempdir().unwrap();
    let star = r#"{"kind":"metric","n":3,"k":"1","depot":0,"tour_mode":"open",
        "distances":[["0","1","1"],["1","0","2"],["1","2","0"]],
        "rewards":[{"values":["0"],"probs":["1"]},{"values":["0","1"],"probs":["1/2","1/2"]},{"values":["0","1"],"probs":["1/2","1/2"]}]}"#;
    std::fs::write(dir.path().join("s.json"), star).unwrap();
    let rep = json(&ok(dir.path(), &["run", "--instance", "s.json", "--policy", "nonadaptive", "--trials", "100"]));
    assert_eq!(rep["expected_length_exact"], "2");
}

#[test]
fn random_generation_and_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["--seed", "9", "gen", "random", "--n", "6", "--k", "8", "--out", "a.json"]);
    ok(p, &["--seed", "9", "gen", "random", "--n", "6", "--k", "8", "--out", "b.json"]);
    assert_eq!(std::fs::read(p.join("a.json")).unwrap(), std::fs::read(p.join("b.json")).unwrap());
    let args = ["--seed", "4", "--format", "csv", "run", "--instance", "a.json", "--trials", "500", "--profile"];
    assert_eq!(ok(p, &args), ok(p, &args));
    ok(p, &["--seed", "10", "gen", "random", "--n", "6", "--k", "8", "--out", "c.json"]);
    assert_ne!(std::fs::read(p.join("a.json")).unwrap(), std::fs::read(p.join("c.json")).unwrap());
}

#[test]
fn capped_sum_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let rep = json(&ok(dir.path(), &["check", "--suite", "capped-sum", "--cases", "500"]));
    assert_eq!(rep["passed"], true);
}

#[test]
fn usage_and_input_errors_fail() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["gen", "example1", "--l", "3", "--out", "e.json"]);
    let zero = sktsp(p, &["run", "--instance", "e.json", "--trials", "0"]);
    assert_eq!(zero.status.code(), Some(2));
    let missing = sktsp(p, &["opt", "--instance", "nope.json"]);
    assert!(!missing.status.success());
    std::fs::write(p.join("bad.json"), r#"{"kind":"knapsack","n":2,"k":"1","depot":0,"tour_mode":"open","costs":[0,1],"rewards":[{"values":["0"],"probs":["1"]},{"values":["1"],"probs":["1/3"]}]}"#).unwrap();
    let bad = sktsp(p, &["opt", "--instance", "bad.json"]);
    assert!(!bad.status.success());
}
