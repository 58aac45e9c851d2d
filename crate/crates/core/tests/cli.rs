//! End-to-end tests of the `transposit` binary: exit codes, file pairing,
//! and reproducibility of seeded suites.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transposit"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("transposit_cli_{}_{}", std::process::id(), name));
    p
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_writes_paired_csv_and_manifest() {
    let stem = tmp("skate");
    let stem_s = stem.to_str().unwrap();
    let out = bin()
        .args([
            "run", "--model", "skate", "--formulation", "mvm-t1", "--set", "omega=1", "--t-end",
            "6.2832", "--dt", "1e-3", "--out", stem_s,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(format!("{}.csv", stem_s)).unwrap();
    let json = std::fs::read_to_string(format!("{}.json", stem_s)).unwrap();
    // floor(6.2832/1e-3) + 1 samples plus the header row
    assert_eq!(csv.lines().count(), 6284 + 1);
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t,x,y,phi,dx,dy,dphi,mult_1,res_1,detW,detG,energy");
    assert!(json.contains("\"summary.samples\": 6284"));
    assert!(json.contains("\"params.omega\": 1.0000000000000000e0"));
    // manifest hash matches the canonical model text
    let emitted = bin().args(["derive", "--model", "skate", "--emit-model"]).output().unwrap();
    let expected = transposit::report::content_hash(&emitted.stdout);
    assert!(json.contains(&format!("\"model.hash\": \"{}\"", expected)));
    std::fs::remove_file(format!("{}.csv", stem_s)).ok();
    std::fs::remove_file(format!("{}.json", stem_s)).ok();
}

#[test]
fn unconstrained_run_has_no_residual_columns() {
    let stem = tmp("free");
    let stem_s = stem.to_str().unwrap();
    run_ok(&[
        "run", "--model", "free_particle", "--formulation", "dalembert", "--t-end", "1", "--dt",
        "0.01", "--out", stem_s,
    ]);
    let csv = std::fs::read_to_string(format!("{}.csv", stem_s)).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(!header.contains("mult"));
    assert!(!header.contains("res"));
    std::fs::remove_file(format!("{}.csv", stem_s)).ok();
    std::fs::remove_file(format!("{}.json", stem_s)).ok();
}

#[test]
fn vakonomic_manifest_records_lambda0() {
    let stem = tmp("vak");
    let stem_s = stem.to_str().unwrap();
    run_ok(&[
        "run", "--model", "skate_vakonomic", "--formulation", "vakonomic", "--set", "lambda0=1",
        "--t-end", "1", "--dt", "1e-2", "--out", stem_s,
    ]);
    let json = std::fs::read_to_string(format!("{}.json", stem_s)).unwrap();
    assert!(json.contains("\"params.lambda0\": 1.0000000000000000e0"));
    assert!(json.contains("\"init.lambda.1\": 1.0000000000000000e0"));
    std::fs::remove_file(format!("{}.csv", stem_s)).ok();
    std::fs::remove_file(format!("{}.json", stem_s)).ok();
}

#[test]
fn compare_reports_divergence_with_exit_zero() {
    let out = run_ok(&[
        "compare", "--model", "skate_vakonomic", "--formulation", "mvm-t1,vakonomic", "--set",
        "lambda0=1", "--t-end", "5", "--dt", "1e-3",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"diverged\": true"));
    assert!(stdout.contains("position_max"));
}

#[test]
fn compare_equivalent_formulations_do_not_diverge() {
    let out = run_ok(&[
        "compare", "--model", "skate", "--formulation", "dalembert,mvm-t1", "--t-end", "5",
        "--dt", "1e-3",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"diverged\": false"));
    // position gap below 1e-8 over [0, 5]
    let line = stdout.lines().find(|l| l.contains("position_max")).unwrap();
    let value: f64 = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').parse().unwrap();
    assert!(value < 1e-8, "gap {}", value);
}

#[test]
fn derive_prints_worked_skate_matrix() {
    let out = run_ok(&[
        "derive", "--model", "skate", "--formulation", "mvm-t1", "--init", "dx=1,dy=0,dphi=2",
        "--json",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"A.0.1\": 2.0000000000000000e0"));
    assert!(stdout.contains("\"A.1.0\": -2.0000000000000000e0"));
    assert!(stdout.contains("\"A.1.2\": 1.0000000000000000e0"));
    assert!(stdout.contains("\"detW\": 1.0000000000000000e0"));
}

#[test]
fn derive_free_particle_has_zero_a() {
    let out = run_ok(&["derive", "--model", "free_particle", "--json"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for key in ["\"A.0.0\"", "\"A.0.1\"", "\"A.1.0\"", "\"A.1.1\""] {
        let line = stdout.lines().find(|l| l.contains(key)).unwrap();
        assert!(line.contains(": 0.0000000000000000e0") || line.contains(": -0.0000000000000000e0"));
    }
}

#[test]
fn derive_gantmacher_detw() {
    let out = run_ok(&["derive", "--model", "gantmacher", "--json"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    // reference state has x1 = 0.3, x2 = 0.4: detW = 0.25² = 0.0625
    let line = stdout.lines().find(|l| l.contains("\"detW\"")).unwrap();
    let value: f64 = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').parse().unwrap();
    assert!((value - 0.0625).abs() < 1e-12, "detW {}", value);
}

#[test]
fn emit_model_round_trips_through_parser() {
    let out = run_ok(&["derive", "--model", "rolling_drum", "--emit-model"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let spec = transposit::expr::parse_model_file(&text).unwrap();
    assert_eq!(spec.name, "rolling_drum");
    assert_eq!(spec.coords.len(), 5);
    assert_eq!(spec.constraints.len(), 3);
}

#[test]
fn check_suites_pass_and_are_reproducible() {
    let a = run_ok(&["check", "--suite", "frames,transposition", "--seed", "9", "--states", "10"]);
    let b = run_ok(&["check", "--suite", "frames,transposition", "--seed", "9", "--states", "10"]);
    assert_eq!(a.stdout, b.stdout);
    let stdout = String::from_utf8_lossy(&a.stdout);
    assert!(stdout.contains("ok"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn unknown_model_exits_one_with_diagnostic() {
    let out = bin().args(["run", "--model", "no_such_model", "--formulation", "dalembert"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_model"));
}

#[test]
fn kink_crossing_run_exits_two() {
    let stem = tmp("kink");
    let stem_s = stem.to_str().unwrap();
    let out = bin()
        .args([
            "run", "--model", "appell_hamel_t1", "--formulation", "dalembert", "--init",
            "dx=0.5,dy=0,dz=0.5", "--t-end", "1", "--dt", "1e-3", "--out", stem_s,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let json = std::fs::read_to_string(format!("{}.json", stem_s)).unwrap();
    assert!(json.contains("\"summary.truncated\": true"));
    assert!(json.contains("domain-error"));
    std::fs::remove_file(format!("{}.csv", stem_s)).ok();
    std::fs::remove_file(format!("{}.json", stem_s)).ok();
}

#[test]
fn model_files_load_from_disk() {
    let path = tmp("custom.model");
    let path_s = path.to_str().unwrap();
    std::fs::write(
        &path,
        "model \"pendulum_like\"\ncoords q\nparam w = 2\nlagrangian 0.5*dq^2 - 0.5*w^2*q^2\naux dq\n",
    )
    .unwrap();
    let stem = tmp("customrun");
    let stem_s = stem.to_str().unwrap();
    run_ok(&[
        "run", "--model", path_s, "--formulation", "dalembert", "--init", "q=1", "--t-end", "1",
        "--dt", "1e-3", "--out", stem_s,
    ]);
    let csv = std::fs::read_to_string(format!("{}.csv", stem_s)).unwrap();
    // q(1) = cos(w·1) for the oscillator started at rest
    let last = csv.lines().last().unwrap();
    let q: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((q - (2.0_f64).cos()).abs() < 1e-8, "q(1) = {}", q);
    std::fs::remove_file(&path).ok();
    std::fs::remove_file(format!("{}.csv", stem_s)).ok();
    std::fs::remove_file(format!("{}.json", stem_s)).ok();
}
