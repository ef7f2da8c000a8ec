//! End-to-end tests of the `cgm` binary: flag handling, machine-readable
//! errors, artifact reproducibility, and manifest reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing artifact {name}: {e}"))
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = cgm(&[]);
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stderr).to_string()
        + &String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Usage"), "no usage text in: {text}");
}

#[test]
fn unknown_preset_is_a_machine_readable_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cgm(&[
        "simulate",
        "--preset",
        "nope",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("\"error\":\"unknown-preset\""),
        "stderr: {stderr}"
    );
}

#[test]
fn oversized_request_reports_a_resource_code() {
    let tmp = tempfile::tempdir().unwrap();
    // The extent-dependent preset needs one passage solve per site, which
    // is budget-capped far below this grid.
    let out = cgm(&[
        "simulate",
        "--preset",
        "fig1d",
        "--grid",
        "4000x4000",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("\"error\":\"resource\""), "stderr: {stderr}");
}

#[test]
fn identical_runs_reproduce_byte_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let d1 = tmp.path().join("d1");
    let d2 = tmp.path().join("d2");
    for d in [&d1, &d2] {
        let out = cgm(&[
            "simulate",
            "--preset",
            "rost",
            "--grid",
            "64x64",
            "--t",
            "30",
            "--seed",
            "7",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["cluster.pgm", "cluster_runs.csv", "boundary_scaled.csv", "run.json"] {
        assert_eq!(read(&d1, name), read(&d2, name), "artifact {name} differs");
    }
}

#[test]
fn manifest_rerun_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let d1 = tmp.path().join("d1");
    let out = cgm(&[
        "simulate",
        "--preset",
        "rost",
        "--grid",
        "48x48",
        "--t",
        "20",
        "--seed",
        "3",
        "--out",
        d1.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // Feed the manifest back as the config; no other flags.
    let d2 = tmp.path().join("d2");
    let out = cgm(&[
        "--config",
        d1.join("run.json").to_str().unwrap(),
        "--out",
        d2.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["cluster.pgm", "cluster_runs.csv", "run.json"] {
        assert_eq!(read(&d1, name), read(&d2, name), "artifact {name} differs");
    }
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for threads in ["1", "2", "8"] {
        let d = tmp.path().join(format!("t{threads}"));
        let out = cgm(&[
            "simulate",
            "--preset",
            "rost",
            "--grid",
            "96x96",
            "--t",
            "40",
            "--seed",
            "11",
            "--threads",
            threads,
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        dirs.push(d);
    }
    for name in ["cluster.pgm", "cluster_runs.csv", "run.json"] {
        let reference = read(&dirs[0], name);
        for d in &dirs[1..] {
            assert_eq!(reference, read(d, name), "artifact {name} differs");
        }
    }
}

#[test]
fn shape_preset_reports_the_flat_and_spike_features() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cgm(&["shape", "--preset", "fig1b", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let features = String::from_utf8(read(tmp.path(), "features.csv")).unwrap();
    // Vertical-axis spike from the limiting intercept 0.5 up to 1.
    assert!(features.contains("spike_v,0,0.5,0,1"), "features: {features}");
    // Flat segment from the intercept to the diagonal.
    assert!(features.contains("flat_v,0,0.5,0.25,0.25"), "features: {features}");
    let boundary = String::from_utf8(read(tmp.path(), "boundary.csv")).unwrap();
    assert!(boundary.starts_with("part,x,y\n"));
}

#[test]
fn centering_on_the_homogeneous_preset_balances_at_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cgm(&[
        "centering",
        "--preset",
        "rost",
        "--grid",
        "64x64",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(read(tmp.path(), "centering.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    let zeta: f64 = fields[2].parse().unwrap();
    let center: f64 = fields[3].parse().unwrap();
    assert!(zeta.abs() < 1e-12, "zeta = {zeta}");
    assert!((center - 256.0).abs() < 1e-9, "center = {center}");
}

#[test]
fn config_file_with_decimal_strings_drives_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{
            "command": "tasep",
            "seed": "5",
            "t": "25.5",
            "grid": "96x48",
            "params": {
                "a": {"kind": "constant", "value": "0.5", "cap": "96"},
                "b": {"kind": "constant", "value": "0.5", "cap": "48"}
            }
        }"#,
    )
    .unwrap();
    let d = tmp.path().join("out");
    let out = cgm(&["--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let heights = String::from_utf8(read(&d, "heights.csv")).unwrap();
    assert!(heights.starts_with("n,height,position\n"));
    assert_eq!(heights.lines().count(), 49, "one row per particle");
    let flux = String::from_utf8(read(&d, "flux.csv")).unwrap();
    assert_eq!(flux.lines().count(), 97, "one row per site");
    // The manifest echoes the explicit families.
    let manifest = String::from_utf8(read(&d, "run.json")).unwrap();
    assert!(manifest.contains("\"kind\": \"constant\""), "{manifest}");
    assert!(manifest.contains("\"t\": \"25.5\""), "{manifest}");
}

#[test]
fn extent_dependent_preset_simulates_within_budget() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cgm(&[
        "simulate",
        "--preset",
        "fig1d",
        "--grid",
        "64x64",
        "--t",
        "80",
        "--seed",
        "2",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pgm = read(tmp.path(), "cluster.pgm");
    assert!(pgm.starts_with(b"P5\n64 64\n1\n"));
}
