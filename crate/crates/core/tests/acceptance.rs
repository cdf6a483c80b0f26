//! Acceptance suite: criteria 1 to 8 come from the first `ergodisk check`
//! run, criterion 9 compares its report with a second run byte for byte.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use std::fs;
use std::process::Command;

use serde_json::Value;

fn run_check(out: &std::path::Path) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_ergodisk"))
        .args(["check", "--out"])
        .arg(out)
        .env_remove("ERGODISK_SEED")
        .output()
        .expect("run ergodisk check");
    (output.status.code().unwrap_or(-1), String::from_utf8_lossy(&output.stdout).into_owned())
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");

    let (first_code, first_stdout) = run_check(dir.path());
    let first = fs::read(&report).expect("first report written");
    let parsed: Value = serde_json::from_slice(&first).unwrap();
    let criteria = parsed["criteria"].as_array().expect("criteria array");
    assert_eq!(criteria.len(), 8, "criteria 1 to 8 in the report");

    let mut failures = Vec::new();
    for c in criteria {
        let id = c["id"].as_u64().unwrap();
        let passed = c["passed"].as_bool().unwrap();
        println!("criterion {id}: {} ({})", if passed { "pass" } else { "FAIL" }, c["name"].as_str().unwrap());
        if !passed {
            println!("    {}", c["detail"].as_str().unwrap_or(""));
            failures.push(id);
        }
    }

    let (second_code, second_stdout) = run_check(dir.path());
    let second = fs::read(&report).expect("second report written");
    let identical = first == second;
    println!("criterion 9: {} (determinism of check reports)", if identical { "pass" } else { "FAIL" });
    if !identical {
        failures.push(9);
    }

    assert!(first_stdout.contains("criterion 9 [SKIP]"), "first run has nothing to compare against");
    assert!(second_stdout.contains(if identical { "criterion 9 [PASS]" } else { "criterion 9 [FAIL]" }));
    let expected = |ok: bool| if ok { 0 } else { 1 };
    assert_eq!(first_code, expected(criteria.iter().all(|c| c["passed"] == true)));
    assert_eq!(second_code, expected(failures.is_empty()));
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
