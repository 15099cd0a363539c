use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn conetool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conetool"))
        .args(args)
        .env_remove("CONETOOL_BUDGET_CAP")
        .output()
        .expect("spawn conetool")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report on stdout")
}

#[test]
fn tile_check_on_bundled_pell_succeeds() {
    let o = conetool(&["tile-check", "pell", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["verdict"], "verified-on-samples");
    assert_eq!(r["budgets"]["samples"], 200);
}

#[test]
fn tiny_radius_exhausts_the_budget() {
    let o = conetool(&["decompose", "pell", "--radius", "0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(report(&o)["verdict"], "budget-exhausted");
}

#[test]
fn non_unimodular_generator_is_an_input_error() {
    let o = conetool(&["validate", &fixture("not-unimodular.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("group: generator 0: determinant 2"), "{}", stderr(&o));
}

#[test]
fn rank_deficient_pullback_is_reported_by_path() {
    let o = conetool(&["validate", &fixture("rank-deficient-pullback.json")]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("chambers[0]: Marking invariant:"), "{err}");
}

#[test]
fn malformed_json_reports_line_and_column() {
    let o = conetool(&["tile-check", &fixture("malformed.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3, column"), "{}", stderr(&o));
}

#[test]
fn overlapping_chambers_are_refuted() {
    let o = conetool(&["validate", &fixture("overlapping-chambers.json"), "--samples", "50"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["verdict"], "refuted");
    let checks = r["certificates"][0]["checks"].as_array().unwrap();
    let dichotomy = checks.iter().find(|c| c["name"] == "dichotomy").unwrap();
    assert_eq!(dichotomy["verdict"], "refuted");
}

#[test]
fn unknown_command_and_missing_file_are_input_errors() {
    assert_eq!(conetool(&["frobnicate", "pell"]).status.code(), Some(1));
    assert_eq!(conetool(&["validate", "/nonexistent/scenario.json"]).status.code(), Some(1));
    assert_eq!(conetool(&["validate", "pell", "--radius", "many"]).status.code(), Some(1));
    assert_eq!(conetool(&["validate"]).status.code(), Some(1));
}

#[test]
fn command_not_applicable_to_scenario_is_an_input_error() {
    let o = conetool(&["product", "pell"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn human_output_is_not_json() {
    let o = conetool(&["fundamental-domain", "quadrant-swap", "--human"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(serde_json::from_str::<Value>(&text).is_err());
    assert!(text.contains("verified"), "{text}");
}

#[test]
fn exceeding_the_environment_budget_cap_exits_3() {
    let o = Command::new(env!("CARGO_BIN_EXE_conetool"))
        .args(["decompose", "pell", "--radius", "6"])
        .env("CONETOOL_BUDGET_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn same_seed_gives_identical_output() {
    let a = conetool(&["pipeline-effective", "quadrant-swap", "--seed", "5", "--samples", "100"]);
    let b = conetool(&["pipeline-effective", "quadrant-swap", "--seed", "5", "--samples", "100"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn emitted_scenario_round_trips() {
    let o = conetool(&["demo", "pell", "--emit"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = std::env::temp_dir().join(format!("conetool-emit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pell.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let run = conetool(&["tile-check", path.to_str().unwrap(), "--samples", "50"]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    std::fs::remove_dir_all(&dir).ok();
}
