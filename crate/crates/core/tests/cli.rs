//! The `ergodisk` binary: outputs, exit codes and byte stability.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ergodisk(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergodisk"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ERGODISK_SEED")
        .output()
        .expect("run ergodisk")
}

fn report(out: &Path) -> Value {
    serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn norms_of_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergodisk(&["norms", "--space", "bloch", "--fn", "poly 0 1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
    let r = report(dir.path());
    assert!((r["norms"]["space_norm"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(r["grid"]["n_radial"], 200);
    assert_eq!(r["tol"], 1e-9);
}

#[test]
fn classify_constant_half_holds_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergodisk(&["classify", "--space", "bloch", "--fn", "const 0.5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    for key in ["power_bounded", "mean_ergodic", "uniformly_mean_ergodic"] {
        assert_eq!(r[key]["status"], "holds", "{key}");
        assert!(!r[key]["citation"].as_str().unwrap().is_empty());
    }
    assert!(r["tolerances"]["unit_band"].is_number());
}

#[test]
fn trace_of_rotation_by_i() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergodisk(&["trace", "--space", "bloch", "--fn", "const 0+1i", "--n", "100", "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,iterate_norm,iterate_err,cesaro_norm,cesaro_err,reference_bound"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 100);
    for row in &rows {
        let n = row[0];
        assert!(row[3] <= 4.0 / (n * 2f64.sqrt()) + row[4], "row {n}");
    }
    assert!(rows[3][3].abs() < 1e-12);
    let svg = fs::read_to_string(dir.path().join("trace.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn trace_without_reference_leaves_column_empty() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergodisk(&["trace", "--fn", "poly 0 0.5", "--n", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn spectrum_cloud_and_label() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergodisk(&["spectrum", "--space", "besov", "--p", "2", "--fn", "poly 0 0.5", "--n", "64", "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["label"], "spectrum");
    assert_eq!(r["one_in_closure"]["answer"], "fails");
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("re,im"));
    assert!(dir.path().join("spectrum.svg").exists());

    let o = ergodisk(&["spectrum", "--fn", "poly 0 1", "--n", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path())["label"], "subset of spectrum");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["norms", "--fn", "poly 0 1", "--unknown"],
        vec!["norms", "--fn", "poly 0 ("],
        vec!["norms", "--fn", "mobius 2"],
        vec!["norms", "--space", "besov", "--fn", "poly 0 1"],
        vec!["norms", "--space", "bloch", "--p", "2", "--fn", "poly 0 1"],
        vec!["classify"],
        vec!["trace", "--fn", "poly 0 1", "--n", "0"],
    ] {
        assert_eq!(ergodisk(&args, dir.path()).status.code(), Some(2), "{args:?}");
    }
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn bad_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ergodisk"))
        .args(["norms", "--fn", "poly 0 1", "--out"])
        .arg(dir.path())
        .env("ERGODISK_SEED", "not a number")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_and_grid_file_are_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(&grid, r#"{"n_radial": 120, "n_angular": 128}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ergodisk"))
        .args(["norms", "--fn", "poly 0 1", "--grid"])
        .arg(&grid)
        .arg("--out")
        .arg(dir.path())
        .env("ERGODISK_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["grid"]["seed"], 7);
    assert_eq!(r["grid"]["n_radial"], 120);
    assert_eq!(r["grid"]["n_angular"], 128);
}

#[test]
fn reports_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["trace", "--fn", "mobius 0.5", "--n", "20", "--svg"];
    assert_eq!(ergodisk(&args, a.path()).status.code(), Some(0));
    assert_eq!(ergodisk(&args, b.path()).status.code(), Some(0));
    for name in ["report.json", "trace.csv", "trace.svg"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
