//! Windowed Monte-Carlo backtest of the daily predictors.
//!
//! The series is cut into `N_w` contiguous trading windows. Inside each window every
//! strategy predicts day by day, with the full history behind it, and is scored on the
//! next day's move. RND is repeated over `runs` independent sub-streams; deterministic
//! strategies are scored once and replicated. Per-window means and standard deviations
//! over runs are then summarised across windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamLabel, PRNG_ALGORITHM};
use crate::series::{compute_returns, fingerprint, volatility, PriceSeries, Prediction};
use crate::strategies::{
    evaluate_prediction, min_history, prediction_path, predict_rnd, Outcome, StrategyId,
    StrategyParams,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub window_counts: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    pub strategies: Vec<StrategyId>,
    pub params: StrategyParams,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            window_counts: vec![3, 9, 18, 30],
            runs: 10,
            seed: 0,
            strategies: StrategyId::ALL.to_vec(),
            params: StrategyParams::default(),
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self, len: usize) -> Result<()> {
        if self.window_counts.is_empty() {
            return Err(Error::Parameter("no window counts given".into()));
        }
        if let Some(&n) = self
            .window_counts
            .iter()
            .find(|&&n| n < 1 || n > len / 2)
        {
            return Err(Error::Parameter(format!(
                "window count {n} outside [1, {}]",
                len / 2
            )));
        }
        if self.runs < 1 {
            return Err(Error::Parameter("runs must be >= 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Parameter("no strategies selected".into()));
        }
        let mut ids = self.strategies.clone();
        ids.sort();
        ids.dedup();
        if ids.len() != self.strategies.len() {
            return Err(Error::Parameter("duplicate strategy".into()));
        }
        self.params.validate()
    }
}

/// Half-open day range `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRange {
    pub lo: usize,
    pub hi: usize,
}

impl DayRange {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

/// `N_w` contiguous windows covering `[0, T)`; the last absorbs `T mod N_w` extra days.
pub fn partition(len: usize, n_windows: usize) -> Result<Vec<DayRange>> {
    if n_windows < 1 || n_windows > len / 2 {
        return Err(Error::Parameter(format!(
            "window count {n_windows} outside [1, {}] for T = {len}",
            len / 2
        )));
    }
    let size = len / n_windows;
    Ok((0..n_windows)
        .map(|w| DayRange {
            lo: w * size,
            hi: if w + 1 == n_windows { len } else { (w + 1) * size },
        })
        .collect())
}

/// Day-by-day bookkeeping for one strategy in one window and run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowTally {
    pub wins: usize,
    pub losses: usize,
    pub flats: usize,
    /// Days before the strategy's warm-up completes.
    pub warmup_skipped: usize,
    /// 1 when the window holds the series' last day, which has no next-day move.
    pub terminal_skipped: usize,
}

impl WindowTally {
    pub fn counted(&self) -> usize {
        self.wins + self.losses
    }

    pub fn total(&self) -> usize {
        self.wins + self.losses + self.flats + self.warmup_skipped + self.terminal_skipped
    }

    /// `100 * wins / (wins + losses)`, `None` when nothing was counted.
    pub fn win_pct(&self) -> Option<f64> {
        let counted = self.counted();
        (counted > 0).then(|| 100.0 * self.wins as f64 / counted as f64)
    }
}

fn tally<F>(values: &[f64], range: DayRange, warm: usize, mut predict: F) -> WindowTally
where
    F: FnMut(usize) -> Prediction,
{
    let last = values.len() - 1;
    let mut tally = WindowTally::default();
    for t in range.lo..range.hi {
        if t < warm {
            tally.warmup_skipped += 1;
            continue;
        }
        if t == last {
            tally.terminal_skipped += 1;
            continue;
        }
        match evaluate_prediction(predict(t), values[t], values[t + 1]) {
            Outcome::Win => tally.wins += 1,
            Outcome::Loss => tally.losses += 1,
            Outcome::Flat => tally.flats += 1,
        }
    }
    tally
}

fn rnd_tally(values: &[f64], range: DayRange, label: StreamLabel, seed: u64) -> WindowTally {
    let mut stream = RngStream::new(seed, label);
    tally(values, range, 0, |_| predict_rnd(&mut stream))
}

fn path_tally(values: &[f64], range: DayRange, warm: usize, path: &[Option<Prediction>]) -> WindowTally {
    tally(values, range, warm, |t| path[t].expect("defined past warm-up"))
}

/// Scores one strategy over one window.
///
/// RND draws one value per scored day from the sub-stream `(seed, label)`; the other
/// strategies ignore `label` and `seed`.
pub fn run_window(
    series: &PriceSeries,
    range: DayRange,
    strategy: StrategyId,
    params: &StrategyParams,
    label: StreamLabel,
    seed: u64,
) -> Result<WindowTally> {
    let values = series.values();
    if range.is_empty() || range.hi > values.len() {
        return Err(Error::Range {
            lo: range.lo,
            hi: range.hi,
            len: values.len(),
        });
    }
    let tally = if strategy.is_random() {
        rnd_tally(values, range, label, seed)
    } else {
        // predictions only look backwards, so the prefix up to `hi` suffices
        let path = prediction_path(strategy, &values[..range.hi], params);
        path_tally(values, range, min_history(strategy, params), &path)
    };
    if tally.counted() == 0 {
        return Err(Error::DegenerateWindow {
            strategy,
            lo: range.lo,
            hi: range.hi,
        });
    }
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyWindowStats {
    pub strategy: StrategyId,
    pub mean_win_pct: f64,
    /// Population standard deviation over runs.
    pub std_win_pct: f64,
    pub run_win_pcts: Vec<f64>,
    pub run_wins: Vec<usize>,
    /// Wins + losses; identical across runs.
    pub counted_days: usize,
    pub flats: usize,
    pub warmup_skipped: usize,
    pub terminal_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window: usize,
    pub lo: usize,
    pub hi: usize,
    /// Population variance of the returns scored in this window.
    pub volatility: f64,
    pub strategies: Vec<StrategyWindowStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: StrategyId,
    /// Mean over windows of the per-window mean win percentage.
    pub mean_win_pct: f64,
    /// Population standard deviation over windows of the same quantity.
    pub std_win_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSetReport {
    pub n_windows: usize,
    pub windows: Vec<WindowReport>,
    pub summary: Vec<StrategySummary>,
}

impl WindowSetReport {
    pub fn summary_for(&self, id: StrategyId) -> Option<&StrategySummary> {
        self.summary.iter().find(|s| s.strategy == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub schema_version: u32,
    pub seed: u64,
    pub config: BacktestConfig,
    pub prng: String,
    pub series_fingerprint: String,
    pub series_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub metadata: ReportMetadata,
    pub window_sets: Vec<WindowSetReport>,
}

impl BacktestReport {
    pub fn window_set(&self, n_windows: usize) -> Option<&WindowSetReport> {
        self.window_sets.iter().find(|w| w.n_windows == n_windows)
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn window_stats(
    values: &[f64],
    range: DayRange,
    strategy: StrategyId,
    config: &BacktestConfig,
    paths: &[(StrategyId, Vec<Option<Prediction>>)],
    n_windows: usize,
    window: usize,
) -> Result<StrategyWindowStats> {
    let tallies: Vec<WindowTally> = if strategy.is_random() {
        (0..config.runs)
            .map(|run| {
                rnd_tally(
                    values,
                    range,
                    StreamLabel::new(n_windows, window, run),
                    config.seed,
                )
            })
            .collect()
    } else {
        let path = &paths
            .iter()
            .find(|(id, _)| *id == strategy)
            .expect("path computed for every deterministic strategy")
            .1;
        let once = path_tally(values, range, min_history(strategy, &config.params), path);
        vec![once; config.runs]
    };
    let first = tallies[0];
    let run_win_pcts: Vec<f64> = tallies
        .iter()
        .map(|t| {
            t.win_pct().ok_or(Error::DegenerateWindow {
                strategy,
                lo: range.lo,
                hi: range.hi,
            })
        })
        .collect::<Result<_>>()?;
    let (mean, std) = if strategy.is_random() {
        mean_std(&run_win_pcts)
    } else {
        (run_win_pcts[0], 0.0)
    };
    Ok(StrategyWindowStats {
        strategy,
        mean_win_pct: mean,
        std_win_pct: std,
        run_wins: tallies.iter().map(|t| t.wins).collect(),
        run_win_pcts,
        counted_days: first.counted(),
        flats: first.flats,
        warmup_skipped: first.warmup_skipped,
        terminal_skipped: first.terminal_skipped,
    })
}

/// Runs the full experiment. Output is identical for identical inputs, whatever the
/// thread schedule.
pub fn run_backtest(series: &PriceSeries, config: &BacktestConfig) -> Result<BacktestReport> {
    let values = series.values();
    config.validate(values.len())?;
    let returns = compute_returns(series);

    let paths: Vec<(StrategyId, Vec<Option<Prediction>>)> = config
        .strategies
        .par_iter()
        .filter(|id| !id.is_random())
        .map(|&id| (id, prediction_path(id, values, &config.params)))
        .collect();

    let mut cells = Vec::new();
    for &n_windows in &config.window_counts {
        for (window, range) in partition(values.len(), n_windows)?.into_iter().enumerate() {
            cells.push((n_windows, window, range));
        }
    }

    let reports: Vec<(usize, WindowReport)> = cells
        .par_iter()
        .map(|&(n_windows, window, range)| {
            let wrap = |e: Error| Error::Window {
                n_windows,
                window,
                source: Box::new(e),
            };
            let strategies = config
                .strategies
                .iter()
                .map(|&id| window_stats(values, range, id, config, &paths, n_windows, window))
                .collect::<Result<Vec<_>>>()
                .map_err(wrap)?;
            let vol_hi = range.hi.min(returns.len());
            let volatility = volatility(&returns, range.lo, vol_hi).map_err(wrap)?;
            Ok((
                n_windows,
                WindowReport {
                    window,
                    lo: range.lo,
                    hi: range.hi,
                    volatility,
                    strategies,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let window_sets = config
        .window_counts
        .iter()
        .map(|&n_windows| {
            let windows: Vec<WindowReport> = reports
                .iter()
                .filter(|(n, _)| *n == n_windows)
                .map(|(_, w)| w.clone())
                .collect();
            let summary = config
                .strategies
                .iter()
                .enumerate()
                .map(|(k, &strategy)| {
                    let means: Vec<f64> =
                        windows.iter().map(|w| w.strategies[k].mean_win_pct).collect();
                    let (mean_win_pct, std_win_pct) = mean_std(&means);
                    StrategySummary {
                        strategy,
                        mean_win_pct,
                        std_win_pct,
                    }
                })
                .collect();
            WindowSetReport {
                n_windows,
                windows,
                summary,
            }
        })
        .collect();

    Ok(BacktestReport {
        metadata: ReportMetadata {
            schema_version: REPORT_SCHEMA_VERSION,
            seed: config.seed,
            config: config.clone(),
            prng: PRNG_ALGORITHM.to_string(),
            series_fingerprint: fingerprint(series),
            series_length: values.len(),
        },
        window_sets,
    })
}
