use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn simons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simons"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(command: &str, config: &str, out: &Path) -> Output {
    let cfg = out.with_extension("json");
    fs::write(&cfg, config).unwrap();
    simons(&[
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ])
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    text.lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

const SMALL_SWEEP: &str = r#"{"k_values": [8, 2, 5.5, 4], "solver": {"depth": 40, "step": 0.01}}"#;

#[test]
fn sweep_writes_sorted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = run_with("sweep", SMALL_SWEEP, &out);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(
        rows[0],
        ["K", "delta1_closed", "delta1_fd", "mu1", "stable"]
    );
    let ks: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ks, [2.0, 4.0, 5.5, 8.0]);
    for r in &rows[1..] {
        let k: f64 = r[0].parse().unwrap();
        let closed: f64 = r[1].parse().unwrap();
        let fd: f64 = r[2].parse().unwrap();
        let mu: f64 = r[3].parse().unwrap();
        assert!((mu - (fd - 6.0)).abs() < 1e-12);
        assert_eq!(r[4], if k > 5.0 { "true" } else { "false" });
        if k < 6.0 {
            assert!((fd - closed).abs() < 1e-2);
        }
        assert!(
            r[1].contains('e') && r[1].split('e').next().unwrap().len() == 18,
            "{}",
            r[1]
        );
    }
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "sweep");
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["upsilon"], 0.1);
    assert!(report["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn identical_config_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_with("sweep", SMALL_SWEEP, &a).status.code(), Some(0));
    assert_eq!(run_with("sweep", SMALL_SWEEP, &b).status.code(), Some(0));
    assert_eq!(
        fs::read(a.join("sweep.csv")).unwrap(),
        fs::read(b.join("sweep.csv")).unwrap()
    );
}

#[test]
fn empty_k_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty");
    let o = run_with("sweep", r#"{"k_values": []}"#, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k_values must not be empty"));
    assert!(!out.exists(), "no outputs on invalid config");
}

#[test]
fn config_violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("calibrate", r#"{"upsilon": 0}"#, &dir.path().join("u"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("upsilon must be positive"));

    let o = run_with(
        "spectrum",
        r#"{"solver": {"step": 0.5, "depth": 100}}"#,
        &dir.path().join("s"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the maximum 0.1"));

    let o = run_with("spectrum", "{ not json", &dir.path().join("p"));
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(
        simons(&["bogus", "--config", "x.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = simons(&["sweep", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = dir.path().join("ok.json");
    fs::write(&cfg, "{}").unwrap();
    let out = blocker.join("out");
    let o = simons(&[
        "compact-analog",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn compact_analog_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ca");
    let o = run_with("compact-analog", r#"{"kappa_values": [100]}"#, &out);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&out.join("compact_analog.csv"));
    assert_eq!(rows.len(), 2);
    let delta: f64 = rows[1][1].parse().unwrap();
    let deviation: f64 = rows[1][3].parse().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((delta - pi2 * 1.02).abs() <= 5.0 * pi2 / 1e4);
    assert!((deviation - (delta - pi2 * 1.02)).abs() < 1e-12);
    // tan√δ = √δ/κ at the reported root
    let r = delta.sqrt();
    assert!((r.tan() - r / 100.0).abs() < 1e-9);
}

#[test]
fn calibration_control_fails_the_sign_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k0");
    let o = run_with("calibrate", r#"{"k": 0, "sign_samples": 50}"#, &out);
    assert_eq!(o.status.code(), Some(1));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let sign = checks.iter().find(|c| c["name"] == "sign_band").unwrap();
    assert_eq!(sign["pass"], false);
    assert!(checks
        .iter()
        .filter(|c| c["name"] != "sign_band")
        .all(|c| c["pass"] == true));
    assert_eq!(csv_rows(&out.join("signband.csv")).len(), 101);
}

#[test]
fn compare_writes_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let o = run_with("compare", r#"{"seeds": [3, 1]}"#, &out);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let rows = csv_rows(&out.join("minimality.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "3");
    assert_eq!(rows[2][0], "1");
    for r in &rows[1..] {
        let slack: f64 = r[6].parse().unwrap();
        let lhs: f64 = r[1].parse().unwrap();
        let rhs: f64 = r[5].parse().unwrap();
        assert!(slack > 0.0);
        assert!((lhs - rhs - slack).abs() < 1e-12);
        assert_eq!(r[12], "true");
    }
}

#[test]
fn shipped_default_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/config/default.json");
    let out = dir.path().join("spec");
    let o = simons(&[
        "spectrum",
        "--config",
        cfg,
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("spectrum.csv").exists());
}
