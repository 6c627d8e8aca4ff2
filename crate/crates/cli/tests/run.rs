use std::process::Command as Process;

use sbp_cli::{exit_code, parse_config_str, run, RunError};
use sbp_core::error::SbpError;
use sbp_core::groundstate::RadialProfile;

#[test]
fn ground_state_writes_cache_constants_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config_str("command = ground-state\np = 2\n").unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    let report = run(&cfg).unwrap();
    assert_eq!(report.exit_code(), 0);
    let cache = dir.path().join("profile_p2.sbpc");
    assert!(std::fs::read(&cache).unwrap().starts_with(b"SBPC1"));
    let prof = RadialProfile::<f64>::load(&cache).unwrap();
    assert!((prof.u0() - 4.19).abs() < 0.01);
    let mut rdr = csv::Reader::from_path(dir.path().join("constants.csv")).unwrap();
    let rows: Vec<(String, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap())
        })
        .collect();
    let get = |k: &str| rows.iter().find(|(n, _)| n == k).unwrap().1;
    assert!((get("C0") + 21.8301).abs() < 1e-3);
    assert!((get("C1") - 65.4904).abs() < 1e-3);
    assert!(get("norm_d1u_h1_sq") > 0.0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "ground-state");
    assert_eq!(manifest["config"]["command"], "ground-state");
    assert!(manifest["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn error_codes() {
    let nc = RunError::Core(SbpError::NoConvergence {
        iterations: 3,
        residual: 1.0,
    });
    assert_eq!(exit_code(&nc), 2);
    assert_eq!(exit_code(&RunError::Core(SbpError::EmptyAdmissible)), 3);
    assert_eq!(exit_code(&RunError::Pool("x".into())), 1);
}

#[test]
fn binary_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "command = ground-state\np = 3\noutput = elsewhere\n").unwrap();
    let out = dir.path().join("out");
    let status = Process::new(env!("CARGO_BIN_EXE_sbp"))
        .args(["--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--seed", "5"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out.join("profile_p3.sbpc").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
}

#[test]
fn binary_reports_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "alpha = 5\n").unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_sbp"))
        .args(["--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must be > 3+sqrt(7)"));
}
