//! End-to-end runs of the `noisetrader` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use noisetrader_core::backtest::{run_backtest, BacktestConfig};
use noisetrader_core::ingest::{generate, load_csv, CsvSpec, SyntheticSpec};
use noisetrader_core::numfmt::format_sig;
use noisetrader_core::report::summary_csv;
use serde_json::Value;
use tempfile::TempDir;

fn noisetrader(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisetrader"))
        .args(args)
        .env("NOISETRADER_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = noisetrader(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn manifest(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn hurst_global_on_gaussian_walk() {
    let dir = TempDir::new().unwrap();
    ok(
        &["hurst", "--synthetic", "gaussian", "--length", "5000", "--seed", "7", "--mode", "global"],
        dir.path(),
    );
    let summary = rows(&read(dir.path(), "hurst_summary.csv"));
    let h: f64 = summary[0][0].parse().unwrap();
    assert!((0.45..=0.55).contains(&h), "H = {h}");
    let points = rows(&read(dir.path(), "hurst_points.csv"));
    assert_eq!(points.len().to_string(), summary[0][3]);
    assert!(points.len() >= 5 && points.len() <= 50);

    let m = manifest(dir.path(), "hurst.manifest.json");
    assert_eq!(m["command"], "hurst");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["outputs"], serde_json::json!(["hurst_points.csv", "hurst_summary.csv"]));
}

#[test]
fn hurst_sliding_row_count() {
    let dir = TempDir::new().unwrap();
    ok(
        &["hurst", "--synthetic", "gaussian", "--length", "3000", "--mode", "sliding"],
        dir.path(),
    );
    let sliding = rows(&read(dir.path(), "hurst_sliding.csv"));
    assert_eq!(sliding.len(), 101);
    assert_eq!(sliding[0][0], "0");
    assert_eq!(sliding[100][0], "2000");
    assert!(sliding.iter().all(|r| r[1].parse::<f64>().unwrap().is_finite()));
}

#[test]
fn backtest_defaults_are_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["backtest", "--synthetic", "gaussian", "--length", "5000", "--seed", "3"];
    ok(&args, a.path());
    ok(&args, b.path());

    for name in ["backtest_windows.csv", "backtest_summary.csv", "returns.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name} differs");
    }
    let mut ma = manifest(a.path(), "backtest.manifest.json");
    let mut mb = manifest(b.path(), "backtest.manifest.json");
    ma["timestamp"] = Value::Null;
    mb["timestamp"] = Value::Null;
    assert_eq!(ma, mb);

    let summary = rows(&read(a.path(), "backtest_summary.csv"));
    assert_eq!(summary.len(), 4 * 5);
    let windows: Vec<usize> = summary.iter().step_by(5).map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(windows, [3, 9, 18, 30]);
    assert_eq!(rows(&read(a.path(), "backtest_windows.csv")).len(), (3 + 9 + 18 + 30) * 5);
    assert_eq!(rows(&read(a.path(), "returns.csv")).len(), 4999);

    // The manifest alone is enough to rebuild the report.
    let config: BacktestConfig = serde_json::from_value(ma["config"].clone()).unwrap();
    assert_eq!(config, BacktestConfig { seed: 3, ..BacktestConfig::default() });
    let synth: SyntheticSpec = serde_json::from_value(ma["input"]["synthetic"].clone()).unwrap();
    let series = generate(&synth).unwrap();
    assert_eq!(ma["input_fingerprint"], noisetrader_core::series::fingerprint(&series));
    let report = run_backtest(&series, &config).unwrap();
    assert_eq!(summary_csv(&report), read(a.path(), "backtest_summary.csv"));
}

#[test]
fn backtest_json_format() {
    let dir = TempDir::new().unwrap();
    ok(
        &["backtest", "--synthetic", "ar1", "--phi", "0.3", "--length", "1500", "--windows", "3,9", "--runs", "4", "--format", "json"],
        dir.path(),
    );
    let doc: Value = serde_json::from_str(&read(dir.path(), "backtest.json")).unwrap();
    assert_eq!(doc["report"]["metadata"]["schema_version"], 1);
    assert_eq!(doc["report"]["window_sets"].as_array().unwrap().len(), 2);
    assert_eq!(doc["returns"].as_array().unwrap().len(), 1499);
    let w = &doc["report"]["window_sets"][0]["windows"][0]["strategies"][0];
    assert_eq!(w["strategy"], "RND");
    assert_eq!(w["run_win_pcts"].as_array().unwrap().len(), 4);
    assert!(!dir.path().join("backtest_summary.csv").exists());
}

#[test]
fn ramp_forces_contrarian_losses() {
    let dir = TempDir::new().unwrap();
    let csv: String = std::iter::once("close\n".to_owned())
        .chain((0..2000).map(|t| format!("{}\n", 100 + t)))
        .collect();
    let input = dir.path().join("ramp.csv");
    fs::write(&input, csv).unwrap();
    ok(
        &["backtest", "--input", input.to_str().unwrap(), "--strategies", "rnd,upd", "--windows", "3"],
        dir.path(),
    );
    for r in rows(&read(dir.path(), "backtest_windows.csv")) {
        let mean: f64 = r[6].parse().unwrap();
        match r[5].as_str() {
            "UPD" => assert_eq!(mean, 0.0),
            "RND" => assert!((40.0..=60.0).contains(&mean), "window RND {mean}"),
            other => panic!("unexpected strategy {other}"),
        }
    }
    let summary = rows(&read(dir.path(), "backtest_summary.csv"));
    let rnd: f64 = summary.iter().find(|r| r[1] == "RND").unwrap()[2].parse().unwrap();
    assert!((48.5..=51.5).contains(&rnd), "RND {rnd}");
}

#[test]
fn generate_writes_reloadable_series() {
    let dir = TempDir::new().unwrap();
    ok(&["generate", "--length", "2", "--seed", "5", "--out", "tiny.csv"], dir.path());
    let tiny = read(dir.path(), "tiny.csv");
    assert_eq!(tiny.lines().count(), 3);
    assert!(tiny.starts_with("date,close\n2000-01-01,1000\n"));
    assert!(dir.path().join("tiny.manifest.json").exists());

    ok(&["generate", "--kind", "ar1", "--phi", "-0.4", "--length", "800", "--seed", "9", "--out", "a.csv"], dir.path());
    ok(&["generate", "--kind", "ar1", "--phi", "-0.4", "--length", "800", "--seed", "9", "--out", "b.csv"], dir.path());
    assert_eq!(read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));

    let loaded = load_csv(&CsvSpec::new(dir.path().join("a.csv"))).unwrap();
    let direct = generate(&SyntheticSpec {
        phi: -0.4,
        ..SyntheticSpec::new(noisetrader_core::SyntheticKind::AR1Walk, 800, 9)
    })
    .unwrap();
    assert_eq!(loaded.len(), 800);
    assert!(loaded.labels().is_some());
    for (x, y) in loaded.values().iter().zip(direct.values()) {
        assert_eq!(format_sig(*x), format_sig(*y));
    }
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["hurst", "--input", "/nonexistent/prices.csv"][..],
        &["backtest", "--synthetic", "gaussian", "--windows", "0"][..],
        &["backtest", "--synthetic", "gaussian", "--length", "40"][..],
        &["hurst", "--synthetic", "gaussian", "--length", "500", "--mode", "sliding"][..],
    ] {
        let o = noisetrader(args, dir.path());
        assert!(!o.status.success(), "{args:?} should fail");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.starts_with("error: "), "{args:?}: {err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}
