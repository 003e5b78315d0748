use std::path::PathBuf;
use std::process::{Command, Output};

use cliffgr::report::CheckReport;

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

fn cliffgr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cliffgr")).args(args).output().unwrap()
}

fn report(out: &Output) -> CheckReport {
    CheckReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).expect("stdout is a report")
}

#[test]
fn minimal_identities_run_is_a_valid_report() {
    let out = cliffgr(&["identities", "--seed", "0", "--count", "1", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.metadata.seed, Some(0));
    assert!(r.metadata.timestamp.is_none());
    assert_eq!(r.summary.failed, 0);
    assert_eq!(r.to_json().as_bytes(), &out.stdout[..]);
}

#[test]
fn timestamp_is_written_by_default() {
    let out = cliffgr(&["identities", "--count", "1"]);
    assert!(report(&out).metadata.timestamp.is_some());
}

#[test]
fn injected_fault_fails_with_exit_one() {
    let out = cliffgr(&["identities", "--count", "10", "--inject-fault", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let c = r.checks.iter().find(|c| c.name == "injected_fault").unwrap();
    assert!(!c.pass && c.residual > c.tolerance);
    assert_eq!(r.summary.failed, 1);
}

#[test]
fn tolerance_override_can_fail_a_check() {
    let out = cliffgr(&["identities", "--count", "50", "--tol", "graded_jacobi=0", "--no-timestamp"]);
    let r = report(&out);
    let c = r.checks.iter().find(|c| c.name == "graded_jacobi").unwrap();
    assert_eq!(c.tolerance, 0.0);
    assert_eq!(out.status.code(), Some(if c.residual > 0.0 { 1 } else { 0 }));
}

#[test]
fn bad_tolerance_syntax_is_an_input_error() {
    assert_eq!(cliffgr(&["identities", "--tol", "first"]).status.code(), Some(2));
    assert_eq!(cliffgr(&["identities", "--tol", "first=-1"]).status.code(), Some(2));
}

#[test]
fn malformed_metric_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "coordinates = [\"t\", \"x\", \"y\", \"z\"]\n[metric]\n\"g.0.0\" = \"1 +* x\"\n\"g.1.1\" = \"-1\"\n",
    )
    .unwrap();
    let out = cliffgr(&["check", "--metric", path.to_str().unwrap(), "--points", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("g.0.0") && err.contains("byte 3"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_metric_file_exits_two() {
    let out = cliffgr(&["check", "--metric", "/nonexistent/metric.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_writes_json_file_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = ["a.json", "b.json"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        let out = cliffgr(&[
            "check", "--metric", &fixture("frw"), "--points", "2", "--seed", "3", "--no-timestamp", "--json",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    let a = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read_to_string(&paths[1]).unwrap());
    let r = CheckReport::from_json(&a).unwrap();
    assert_eq!(r.to_json(), a);
    assert!(r.duplicate_names().is_empty());
    assert_eq!(r.metadata.metric_label.as_deref(), Some("Flat FRW dust"));
}

#[test]
fn different_seeds_sample_different_points() {
    let run = |seed: &str| report(&cliffgr(&["claims", "--metric", &fixture("schwarzschild"), "--points", "1", "--seed", seed, "--no-timestamp"]));
    assert_ne!(run("1").checks[0].point, run("2").checks[0].point);
}

#[test]
fn energy_refuses_charts_that_are_not_quasi_cartesian() {
    let out = cliffgr(&["energy", "--metric", &fixture("schwarzschild")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quasi_cartesian"));
}

#[test]
fn energy_rejects_low_quadrature_order() {
    let out = cliffgr(&["energy", "--metric", &fixture("minkowski_qc"), "--quad-order", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn isotropic_energy_emits_comparison_only() {
    let out = cliffgr(&["energy", "--metric", &fixture("isotropic_qc"), "--radii", "50,100,200", "--quad-order", "16", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.checks.is_empty());
    let t = &r.tables["comparison"];
    assert_eq!(t.columns, ["radius", "mass", "parameter_m", "difference"]);
    assert_eq!(t.rows.len(), 4);
}

#[test]
fn claims_notes_flat_space_and_non_vacuum() {
    let flat = report(&cliffgr(&["claims", "--metric", &fixture("minkowski"), "--points", "3", "--no-timestamp"]));
    assert!(flat.metadata.notes.iter().any(|n| n == "witness inconclusive on flat space"));
    assert!(flat.checks.iter().all(|c| c.name != "evans_witness"));
    assert!(flat.checks.iter().all(|c| c.residual < 1e-12));

    let frw = cliffgr(&["claims", "--metric", &fixture("frw"), "--points", "3", "--no-timestamp"]);
    assert_eq!(frw.status.code(), Some(0));
    let frw = report(&frw);
    assert!(frw.checks.iter().all(|c| c.name != "vacuum_f"));
    assert!(frw.metadata.notes.iter().any(|n| n.starts_with("vacuum_f skipped")));
}

#[test]
fn claims_on_schwarzschild_reproduce_the_witness() {
    let out = cliffgr(&["claims", "--metric", &fixture("schwarzschild"), "--points", "5", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let w: Vec<_> = r.checks.iter().filter(|c| c.name == "evans_witness").collect();
    assert_eq!(w.len(), 5);
    assert!(w.iter().all(|c| c.pass && c.residual > 1e-6));
}
