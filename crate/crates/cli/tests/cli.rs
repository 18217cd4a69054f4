use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use weakmeas_core::sampler::parse_records_csv;

fn weakmeas(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakmeas")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn lg_sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = weakmeas(&["lg-sweep"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("lg_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda_over_omega,x2_chain,x2_closed,abs_diff"));
    assert_eq!(lines.count(), 200);
    let summary = json(&dir.path().join("lg_sweep.json"));
    for k in ["experiment", "config", "results", "checks"] {
        assert!(summary.get(k).is_some(), "missing {k}");
    }
    assert_eq!(summary["config"]["grid"], "log:1e-3:1e2:200");
    let bracket = summary["results"]["zero_bracket_omega_over_lambda"].as_array().unwrap();
    assert!(bracket[0].as_f64().unwrap() > 10.0 && bracket[1].as_f64().unwrap() < 12.0);
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = cfg_dir.path().join("run.conf");
    fs::write(&cfg, "# small ensemble\nmodel = tls\nlambda = 0.5\nt0 = 0.5\nn_records = 50\nnu = 2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = weakmeas(&["record-sim", "--config", cfg, "--seed", "9"], d.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["records.csv", "record_sim.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    weakmeas(&["record-sim", "--config", cfg, "--seed", "10"], c.path());
    assert_ne!(fs::read(a.path().join("records.csv")).unwrap(), fs::read(c.path().join("records.csv")).unwrap());

    let rows = parse_records_csv(&fs::read(a.path().join("records.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 50 * 50);
    assert_eq!(json(&a.path().join("record_sim.json"))["config"]["seed"], "9");
}

#[test]
fn commuting_record_summary_matches_detector_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = weakmeas(&["record-sim", "--seed", "3", "--set", "n_records=4000"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let s = json(&dir.path().join("record_sim.json"));
    let scaled = s["results"]["time_average"]["variance_times_4_lambda_t0"].as_f64().unwrap();
    assert!((0.9..=1.1).contains(&scaled), "{scaled}");
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(weakmeas(&["no-such-experiment"], dir.path()).status.code(), Some(2));
    assert_eq!(weakmeas(&["lg-sweep", "--set", "omgea=1"], dir.path()).status.code(), Some(2));
    assert_eq!(weakmeas(&["lg-sweep", "--set", "grid=log:0:1:5"], dir.path()).status.code(), Some(2));
    assert_eq!(weakmeas(&["lg-sweep", "--config", "/nonexistent/run.conf"], dir.path()).status.code(), Some(2));
    // stochastic experiments need a seed
    assert_eq!(weakmeas(&["ho-noise"], dir.path()).status.code(), Some(2));
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "omega = 1\nomega = 2\n").unwrap();
    let out = weakmeas(&["lg-sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn validate_passes_and_tampered_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = weakmeas(&["validate", "--set", "checks=2,8,9"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let report = json(&dir.path().join("validate.json"));
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["runtime_s"].is_number() && c["subchecks"].is_array()));

    let tampered = weakmeas(&["validate", "--set", "checks=2,8,9", "--set", "tolerance_scale=1e-9"], dir.path());
    assert_eq!(tampered.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&tampered.stdout).contains("[FAIL]"));
}

#[test]
fn seeded_checks_report_their_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = weakmeas(&["validate", "--seed", "4", "--set", "checks=5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("validate.json"));
    assert_eq!(report["checks"][0]["seed"], 4_050_000);
}

#[test]
fn tls_correlate_with_monte_carlo_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        weakmeas(&["tls-correlate", "--seed", "2", "--set", "t_grid=0.5,1.5", "--set", "n_traj=2000"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("tls_correlate.csv")).unwrap();
    assert!(csv.starts_with("t,t_prime,chain,closed,abs_diff,mc,mc_stat_error\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn ho_noise_reports_fourier_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = weakmeas(&["ho-noise", "--seed", "5", "--set", "n_traj=2000", "--set", "t_grid=1,2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let s = json(&dir.path().join("ho_noise.json"));
    let bound = s["results"]["fourier"]["bound"].as_f64().unwrap();
    assert!((bound - 1.0 / 3f64.sqrt()).abs() < 1e-15);
}
