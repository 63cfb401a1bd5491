use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fqq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fqq"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn without_elapsed(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("elapsed_ms");
    }
    v
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sum_of_two_squares_example() {
    let out = fqq(&["sum2sq", "--q", "7", "--r", "3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["a"], 1);
    assert_eq!(v["b"], 3);
}

#[test]
fn sharpness_p3() {
    let out = fqq(&["sharpness", "--p", "3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["details"]["set_size"], 9);
    assert_eq!(v["details"]["distance_set_size"], 3);
}

#[test]
fn domain_and_usage_errors_exit_2() {
    for args in [
        vec!["verify-main", "--q", "6"],
        vec!["verify-main", "--q", "13"],
        vec!["field-info", "--q", "12"],
        vec!["field-info", "--q", "9", "--format", "csv"],
        vec!["sum2sq", "--q", "7"],
        vec!["vr", "--q", "7"],
        vec!["no-such-command"],
        vec!["distances", "--q", "3", "--size", "10"],
    ] {
        let out = fqq(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(!err.trim().is_empty(), "{args:?}");
    }
}

#[test]
fn verify_main_passes_and_is_deterministic() {
    let args = ["verify-main", "--q", "7", "--trials", "8", "--seed", "3"];
    let a = fqq(&args);
    let b = fqq(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(json(&a)["pass"], true);
    assert_eq!(without_elapsed(json(&a)), without_elapsed(json(&b)));
}

#[test]
fn random_sets_are_reproducible() {
    let args = ["vr", "--q", "11", "--size", "30", "--seed", "9"];
    assert_eq!(fqq(&args).stdout, fqq(&args).stdout);
    let other = fqq(&["vr", "--q", "11", "--size", "30", "--seed", "10"]);
    assert_ne!(fqq(&args).stdout, other.stdout);
}

#[test]
fn csv_for_histograms() {
    let out = fqq(&["distances", "--q", "7", "--size", "12", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,count"));
    let total: u64 = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 12 * 12);
}

#[test]
fn save_and_load_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("set.json");
    let saved = saved.to_str().unwrap();
    let first = fqq(&[
        "distances",
        "--q",
        "9",
        "--size",
        "15",
        "--seed",
        "4",
        "--save-set",
        saved,
    ]);
    assert_eq!(code(&first), 0);
    let second = fqq(&["distances", "--in", saved]);
    assert_eq!(code(&second), 0);
    assert_eq!(first.stdout, second.stdout);

    let report = dir.path().join("out.json");
    let out = fqq(&["vr", "--in", saved, "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["size"], 15);
}

#[test]
fn load_errors_name_the_point() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "range.json",
        r#"{"field":{"p":7,"n":1},"dim":2,"points":[[0,1],[2,9]]}"#,
    );
    let out = fqq(&["distances", "--in", &bad]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains('9'));

    let dup = write(
        dir.path(),
        "dup.json",
        r#"{"field":{"p":7,"n":1},"dim":2,"points":[[0,1],[3,4],[0,1]]}"#,
    );
    let out = fqq(&["distances", "--in", &dup]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr)
        .to_lowercase()
        .contains("duplicate"));

    let missing = dir.path().join("nope.json");
    assert_eq!(
        code(&fqq(&["distances", "--in", missing.to_str().unwrap()])),
        2
    );
}

#[test]
fn energy_identity_holds() {
    let out = fqq(&["energy-identity", "--q", "7", "--size", "20", "--r", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["details"]["residual"], "0");
}

#[test]
fn coefficient_list_ratios() {
    let a = fqq(&["sum2sq", "--q", "9", "--r", "[1,1]"]);
    let b = fqq(&["sum2sq", "--q", "9", "--r", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn finder_not_found_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let tiny = write(
        dir.path(),
        "tiny.json",
        r#"{"field":{"p":7,"n":1},"dim":2,"points":[[0,0],[0,1]]}"#,
    );
    let out = fqq(&["find-config", "--in", &tiny, "--r", "2", "--k", "3"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["found"], false);
}

#[test]
fn finder_found_on_large_set() {
    let out = fqq(&[
        "find-config",
        "--q",
        "7",
        "--size",
        "40",
        "--r",
        "2",
        "--k",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["found"], true);
}
