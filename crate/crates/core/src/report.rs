//! Tabular and JSON serialization of results, plus run manifests.
//!
//! CSV columns are in a fixed order and every float is written with
//! [`format_sig`](crate::numfmt::format_sig). JSON numbers are rounded to the same
//! 10 significant digits.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::backtest::BacktestReport;
use crate::error::Result;
use crate::hurst::{HurstEstimate, SlidingPoint};
use crate::ingest::write_atomic;
use crate::numfmt::{format_sig, round_sig};
use crate::series::ReturnsSeries;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Value,
    pub input_fingerprint: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub prng: String,
    pub version: String,
    /// Excluded from reproducibility comparisons.
    pub timestamp: String,
    pub outputs: Vec<String>,
}

pub fn fit_points_csv(est: &HurstEstimate) -> String {
    let mut out = String::from("n,sigma\n");
    for p in &est.points {
        out.push_str(&format!("{},{}\n", p.n, format_sig(p.sigma)));
    }
    out
}

pub fn hurst_summary_csv(est: &HurstEstimate) -> String {
    format!(
        "h,r_squared,intercept,points\n{},{},{},{}\n",
        format_sig(est.h),
        format_sig(est.r_squared),
        format_sig(est.intercept),
        est.points.len()
    )
}

pub fn sliding_csv(points: &[SlidingPoint]) -> String {
    let mut out = String::from("t,h\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.t, format_sig(p.h)));
    }
    out
}

pub fn returns_csv(returns: &ReturnsSeries) -> String {
    let mut out = String::from("t,return\n");
    for (t, r) in returns.values().iter().enumerate() {
        out.push_str(&format!("{t},{}\n", format_sig(*r)));
    }
    out
}

pub const WINDOWS_CSV_HEADER: &str = "n_windows,window,lo,hi,volatility,strategy,mean_win_pct,std_win_pct,counted_days,flats,warmup_skipped,terminal_skipped";
pub const SUMMARY_CSV_HEADER: &str = "n_windows,strategy,mean_win_pct,std_win_pct";

/// One row per (N_w, window, strategy), in that order.
pub fn windows_csv(report: &BacktestReport) -> String {
    let mut out = format!("{WINDOWS_CSV_HEADER}\n");
    for set in &report.window_sets {
        for w in &set.windows {
            for s in &w.strategies {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    set.n_windows,
                    w.window,
                    w.lo,
                    w.hi,
                    format_sig(w.volatility),
                    s.strategy,
                    format_sig(s.mean_win_pct),
                    format_sig(s.std_win_pct),
                    s.counted_days,
                    s.flats,
                    s.warmup_skipped,
                    s.terminal_skipped
                ));
            }
        }
    }
    out
}

/// Cross-window mean and standard deviation per (N_w, strategy).
pub fn summary_csv(report: &BacktestReport) -> String {
    let mut out = format!("{SUMMARY_CSV_HEADER}\n");
    for set in &report.window_sets {
        for s in &set.summary {
            out.push_str(&format!(
                "{},{},{},{}\n",
                set.n_windows,
                s.strategy,
                format_sig(s.mean_win_pct),
                format_sig(s.std_win_pct)
            ));
        }
    }
    out
}

/// Rounds every float in a JSON tree to 10 significant digits.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|f| serde_json::Number::from_f64(round_sig(f)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

pub fn to_rounded_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = round_json(serde_json::to_value(value)?);
    let mut text = serde_json::to_string_pretty(&tree)?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct BacktestJson<'a> {
    report: &'a BacktestReport,
    returns: &'a [f64],
}

/// Versioned JSON document: `{"report": {...}, "returns": [...]}`.
pub fn backtest_json(report: &BacktestReport, returns: &ReturnsSeries) -> Result<String> {
    to_rounded_json(&BacktestJson {
        report,
        returns: returns.values(),
    })
}

/// Writes named files into `dir` and a manifest listing them. Returns all paths written,
/// manifest last.
pub fn write_bundle(
    dir: &Path,
    files: &[(String, String)],
    manifest_name: &str,
    mut manifest: RunManifest,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len() + 1);
    for (name, body) in files {
        let path = dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        written.push(path);
    }
    manifest.outputs = files.iter().map(|(n, _)| n.clone()).collect();
    let manifest_path = dir.join(manifest_name);
    write_atomic(&manifest_path, to_rounded_json(&manifest)?.as_bytes())?;
    written.push(manifest_path);
    Ok(written)
}
