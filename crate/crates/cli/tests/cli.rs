use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sads-udw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut a = args.to_vec();
    a.extend_from_slice(&["--out", out.to_str().unwrap()]);
    run(&a)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap()
}

fn data_lines(dir: &Path, file: &str) -> Vec<String> {
    String::from_utf8(read(dir, file))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

const STATIC: [&str; 12] = [
    "static-rate", "--r-plus", "0.1", "--radius", "1", "--vacuum", "both", "--e-min", "-10", "--e-max", "10", "--e-count=41",
];

#[test]
fn worker_count_does_not_change_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut one = STATIC.to_vec();
    one.extend_from_slice(&["--workers", "1"]);
    let mut four = STATIC.to_vec();
    four.extend_from_slice(&["--workers", "4"]);
    assert_eq!(run_in(a.path(), &one).status.code(), Some(0));
    assert_eq!(run_in(b.path(), &four).status.code(), Some(0));
    for f in ["static-rate_hh.csv", "static-rate_boulware.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn manifest_checksums_match_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &STATIC).status.code(), Some(0));
    let m = manifest(dir.path());
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let bytes = read(dir.path(), f["path"].as_str().unwrap());
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert_eq!(m["config"]["e_count"], 41);
    assert_eq!(m["tasks"][0]["truncation"]["fixed"], 41);
}

#[test]
fn static_columns_and_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &STATIC);
    let lines = data_lines(dir.path(), "static-rate_hh.csv");
    assert_eq!(
        lines[0],
        "E_over_Tloc,total_rate,rate_l0,rate_l1,rate_l2,rate_l3,rate_l4,truncation_flag"
    );
    assert_eq!(lines.len(), 42);
    // E = 0 is moved off the endpoint and reported in the header
    let text = String::from_utf8(read(dir.path(), "static-rate_hh.csv")).unwrap();
    assert!(text.contains("# shifted = 20\n"));
    assert!(text.contains("# units: canonical"));
    assert!(text.contains("# l-max = 4\n"));
    for l in &lines[1..] {
        let cells: Vec<&str> = l.split(',').collect();
        let total: f64 = cells[1].parse().unwrap();
        let parts: f64 = cells[2..7].iter().map(|c| c.parse::<f64>().unwrap()).sum();
        assert!((total - parts).abs() <= 1e-12 * total.abs().max(1e-300), "{l}");
    }
}

#[test]
fn disk_cache_serves_the_second_run() {
    let cache = tempfile::tempdir().unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = STATIC.to_vec();
    args.extend_from_slice(&["--cache-dir", cache.path().to_str().unwrap()]);
    run_in(a.path(), &args);
    let first = manifest(a.path());
    assert!(first["cache"]["misses"].as_u64().unwrap() > 0);
    run_in(b.path(), &args);
    let second = manifest(b.path());
    assert_eq!(second["cache"]["misses"], 0);
    assert_eq!(second["cache"]["disk_hits"], first["cache"]["misses"]);
    assert_eq!(read(a.path(), "static-rate_hh.csv"), read(b.path(), "static-rate_hh.csv"));
}

#[test]
fn tolerance_change_recomputes() {
    let cache = tempfile::tempdir().unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = STATIC.to_vec();
    args.extend_from_slice(&["--cache-dir", cache.path().to_str().unwrap()]);
    run_in(a.path(), &args);
    args.extend_from_slice(&["--rtol", "1e-12"]);
    run_in(b.path(), &args);
    let m = manifest(b.path());
    assert_eq!(m["cache"]["disk_hits"], 0);
    assert_eq!(m["cache"]["misses"], manifest(a.path())["cache"]["misses"]);
}

#[test]
fn corrupt_entries_are_recomputed_with_a_warning() {
    let cache = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    let mut args = STATIC.to_vec();
    args.extend_from_slice(&["--cache-dir", cache.path().to_str().unwrap()]);
    run_in(a.path(), &args);
    let entries: Vec<_> = std::fs::read_dir(cache.path()).unwrap().map(|e| e.unwrap().path()).collect();
    std::fs::write(&entries[0], b"truncated{").unwrap();
    // a well-formed entry stored under the wrong address
    std::fs::copy(&entries[2], &entries[1]).unwrap();

    let out = run_in(b.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: cache entry"));
    let m = manifest(b.path());
    assert_eq!(m["cache"]["corrupt"], 2);
    assert_eq!(m["cache"]["misses"], 2);
    assert_eq!(read(a.path(), "static-rate_hh.csv"), read(b.path(), "static-rate_hh.csv"));

    run_in(c.path(), &args);
    assert_eq!(manifest(c.path())["cache"]["corrupt"], 0);
    assert_eq!(manifest(c.path())["cache"]["misses"], 0);
}

#[test]
fn circular_grid_reuses_modes() {
    // on a symmetric grid omega_+(m, -E) equals omega_-(m, E) bit for bit
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "circular-rate", "--r-plus", "0.1", "--radius", "1", "--e-min", "-3", "--e-max", "3", "--e-count", "13",
    ];
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));
    let m = manifest(dir.path());
    assert!(m["cache"]["memory_hits"].as_u64().unwrap() > 0);
    assert_eq!(data_lines(dir.path(), "circular-rate_hh.csv")[0].split(',').next(), Some("E"));
}

#[test]
fn config_errors_exit_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = out.to_str().unwrap();
    let cases: [&[&str]; 6] = [
        &["static-rate", "--r-plus", "0.1", "--radius", "1", "--e-count", "1", "--out", o],
        &["static-rate", "--r-plus", "0.1", "--radius", "1", "--e-min", "3", "--e-max", "3", "--out", o],
        &["static-rate", "--r-plus", "0.1", "--radius", "1", "--atol", "0", "--out", o],
        &["static-rate", "--r-plus", "0.1", "--out", o],
        &["peak-fit", "--r-plus", "0.01,0.02", "--radius-ratio", "10", "--out", o],
        &["static-rate", "--r-plus", "0.1", "--radius", "1", "--vacuum", "neither", "--out", o],
    ];
    for args in cases {
        let r = run(args);
        assert_eq!(r.status.code(), Some(2), "{args:?}");
        assert!(!out.exists(), "{args:?}");
    }
}

#[test]
fn config_file_with_command_line_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# coarse static run\nr_plus = 0.1\nradius = 1\ne-min = -4\ne_max = 4\ne_count = 3\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = run(&[
        "static-rate",
        "--config",
        cfg.to_str().unwrap(),
        "--e-count",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0));
    let lines = data_lines(&out, "static-rate_hh.csv");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("-4,"));
}

#[test]
fn partial_failures_are_recorded_once() {
    // omega^2 <= l(l+1) = 6 lies outside the scattering regime
    let dir = tempfile::tempdir().unwrap();
    let args = ["wkb", "--r-plus", "1", "--l", "2", "--e-min", "1", "--e-max", "5", "--e-count", "9"];
    let r = run_in(dir.path(), &args);
    assert_eq!(r.status.code(), Some(3));
    let rows = data_lines(dir.path(), "wkb.csv");
    assert_eq!(rows.len(), 10);
    let failed = data_lines(dir.path(), "wkb.failures.csv");
    let idx: Vec<&str> = failed[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(idx, ["0", "1", "2"]);
    assert!(rows[1].starts_with("1,NaN"));
    assert!(!rows[4].contains("NaN"));
    assert_eq!(manifest(dir.path())["exit_code"], 3);
}

#[test]
fn total_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["wkb", "--r-plus", "1", "--l", "3", "--e-min", "1", "--e-max", "2", "--e-count", "4"];
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(4));
    assert_eq!(data_lines(dir.path(), "wkb.failures.csv").len(), 5);
}

#[test]
fn scan_peaks_columns() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "scan-peaks", "--r-plus", "0.1", "--radius", "1", "--l-max", "2", "--e-min", "0.5", "--e-max", "12",
        "--e-count", "300",
    ];
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));
    let lines = data_lines(dir.path(), "scan-peaks_hh.csv");
    assert_eq!(lines[0], "r_plus,l,n,E_over_Tloc,omega_tilde_R,height,half_width");
    assert!(lines.len() > 3);
    assert!(lines[1..].iter().all(|l| l.starts_with("0.1,")));
}

#[test]
fn mode_profile_vanishes_at_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["mode", "--r-plus", "0.1", "--omega", "2.5", "--l", "1", "--points", "21"];
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));
    let lines = data_lines(dir.path(), "mode.csv");
    assert_eq!(lines[0], "r,r_star,R,R_tilde,dR_tilde_drstar");
    assert_eq!(lines.len(), 22);
    let last: Vec<f64> = lines[21].split(',').map(|c| c.parse().unwrap()).collect();
    // R~ ~ r* dR~/dr* as r* -> 0
    assert!((last[3] - last[1] * last[4]).abs() < 1e-3 * last[3].abs());
}
