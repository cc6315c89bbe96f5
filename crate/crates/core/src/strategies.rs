//! Daily directional predictors: RND, MOM, RSI, UPD and MACD.
//!
//! Every predictor sees the full price history `I(0..=t)` (a slice whose last element is
//! today's close) and emits a [`Prediction`] for the sign of `I(t+1) - I(t)`. Ties
//! always resolve to Bullish.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::series::Prediction;

/// MACD values closer than this fraction of the current price count as equal.
pub const MACD_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StrategyId {
    Rnd,
    Mom,
    Rsi,
    Upd,
    Macd,
}

impl StrategyId {
    pub const ALL: [StrategyId; 5] = [
        StrategyId::Rnd,
        StrategyId::Mom,
        StrategyId::Rsi,
        StrategyId::Upd,
        StrategyId::Macd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyId::Rnd => "RND",
            StrategyId::Mom => "MOM",
            StrategyId::Rsi => "RSI",
            StrategyId::Upd => "UPD",
            StrategyId::Macd => "MACD",
        }
    }

    pub fn is_random(self) -> bool {
        self == StrategyId::Rnd
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumConfig {
    pub tau: usize,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        Self { tau: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsiConfig {
    /// Days of price changes behind each RS value.
    pub lookback: usize,
    /// Days over which price and RSI trends are compared.
    pub divergence_window: usize,
}

impl Default for RsiConfig {
    fn default() -> Self {
        Self {
            lookback: 14,
            divergence_window: 14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacdConfig {
    pub fast: usize,
    pub slow: usize,
    pub signal: usize,
}

impl Default for MacdConfig {
    fn default() -> Self {
        Self {
            fast: 12,
            slow: 26,
            signal: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyParams {
    pub momentum: MomentumConfig,
    pub rsi: RsiConfig,
    pub macd: MacdConfig,
}

impl StrategyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.into()));
        if self.momentum.tau < 1 {
            return bad("momentum lag must be >= 1");
        }
        if self.rsi.lookback < 2 || self.rsi.divergence_window < 2 {
            return bad("RSI windows must be >= 2");
        }
        let m = self.macd;
        if m.fast < 1 || m.fast >= m.slow || m.signal < 1 {
            return bad("MACD windows need 1 <= fast < slow and signal >= 1");
        }
        Ok(())
    }
}

/// Smallest `t` at which a strategy can predict.
pub fn min_history(id: StrategyId, params: &StrategyParams) -> usize {
    match id {
        StrategyId::Rnd => 0,
        StrategyId::Upd => 1,
        StrategyId::Mom => params.momentum.tau,
        StrategyId::Rsi => params.rsi.lookback + params.rsi.divergence_window,
        // slow EMA first defined at slow-1, signal after `signal` MACD values
        StrategyId::Macd => params.macd.slow + params.macd.signal - 2,
    }
}

fn today(id: StrategyId, history: &[f64], needed: usize) -> Result<usize> {
    match history.len().checked_sub(1) {
        Some(t) if t >= needed => Ok(t),
        _ => Err(Error::History {
            strategy: id,
            needed,
            t: history.len().saturating_sub(1),
        }),
    }
}

pub fn predict_rnd(stream: &mut RngStream) -> Prediction {
    stream.next_prediction()
}

/// Bullish when `I(t) - I(t - tau) >= 0`.
pub fn predict_mom(history: &[f64], config: &MomentumConfig) -> Result<Prediction> {
    let t = today(StrategyId::Mom, history, config.tau)?;
    Ok(Prediction::from_sign(history[t] - history[t - config.tau]))
}

/// Opposite of the last move; a flat day predicts Bullish.
pub fn predict_upd(history: &[f64]) -> Result<Prediction> {
    let t = today(StrategyId::Upd, history, 1)?;
    let last = history[t] - history[t - 1];
    Ok(if last > 0.0 {
        Prediction::Bearish
    } else {
        Prediction::Bullish
    })
}

/// `RSI(t) = 100 - 100 / (1 + RS)` over the `lookback` one-day changes ending at `t`.
///
/// RS is summed gains over summed absolute losses. No losses gives 100, no change at
/// all gives 50. The value is exactly 100 only when there are no losses.
pub fn rsi_value(history: &[f64], t: usize, lookback: usize) -> Result<f64> {
    if t < lookback || t >= history.len() {
        return Err(Error::History {
            strategy: StrategyId::Rsi,
            needed: lookback,
            t,
        });
    }
    let (mut gains, mut losses) = (0.0, 0.0);
    for k in t + 1 - lookback..=t {
        let d = history[k] - history[k - 1];
        if d > 0.0 {
            gains += d;
        } else {
            losses -= d;
        }
    }
    Ok(if losses == 0.0 {
        if gains == 0.0 {
            50.0
        } else {
            100.0
        }
    } else {
        (100.0 - 100.0 / (1.0 + gains / losses)).min(100f64.next_down())
    })
}

/// Sign of the least-squares slope of `ys` against `0, 1, 2, ...`.
///
/// Values are centred on the first element so an exactly flat window gives 0.
pub fn trend_sign(ys: &[f64]) -> f64 {
    let mean_x = (ys.len() as f64 - 1.0) / 2.0;
    let y0 = ys[0];
    let sxy: f64 = ys
        .iter()
        .enumerate()
        .map(|(k, y)| (k as f64 - mean_x) * (y - y0))
        .sum();
    if sxy > 0.0 {
        1.0
    } else if sxy < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Trend of the `divergence_window` days before `t`, flipped when the RSI trend over
/// the same days points strictly the other way.
pub fn predict_rsi(history: &[f64], config: &RsiConfig) -> Result<Prediction> {
    let t = today(
        StrategyId::Rsi,
        history,
        config.lookback + config.divergence_window,
    )?;
    let lo = t - config.divergence_window;
    let rsi: Vec<f64> = (lo..t)
        .map(|k| rsi_value(history, k, config.lookback))
        .collect::<Result<_>>()?;
    Ok(rsi_decision(&history[lo..t], &rsi))
}

fn rsi_decision(prices: &[f64], rsi: &[f64]) -> Prediction {
    let price_trend = trend_sign(prices);
    let rsi_trend = trend_sign(rsi);
    let baseline = Prediction::from_sign(price_trend);
    if price_trend * rsi_trend < 0.0 {
        baseline.flipped()
    } else {
        baseline
    }
}

/// Exponential moving average over `values`, seeded with the plain mean of the first
/// `window` values and advanced by `e += w * (v - e)`, `w = 2 / (window + 1)`.
///
/// Element `j` of the output belongs to index `window - 1 + j` of the input. Empty when
/// the input is shorter than `window`.
pub fn ema(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    let w = 2.0 / (window as f64 + 1.0);
    let v0 = values[0];
    // centred so a constant input seeds to exactly that constant
    let seed = v0 + values[..window].iter().map(|v| v - v0).sum::<f64>() / window as f64;
    let mut out = Vec::with_capacity(values.len() - window + 1);
    out.push(seed);
    let mut e = seed;
    for &v in &values[window..] {
        e += w * (v - e);
        out.push(e);
    }
    out
}

/// MACD and signal lines aligned to price indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MacdLines {
    /// Index of the first MACD value (`slow - 1`).
    pub macd_start: usize,
    pub macd: Vec<f64>,
    /// Index of the first signal value (`slow + signal - 2`).
    pub signal_start: usize,
    pub signal: Vec<f64>,
}

impl MacdLines {
    pub fn macd_at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.macd_start)
            .and_then(|i| self.macd.get(i).copied())
    }

    pub fn signal_at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.signal_start)
            .and_then(|i| self.signal.get(i).copied())
    }
}

pub fn macd_lines(values: &[f64], config: &MacdConfig) -> MacdLines {
    let fast = ema(values, config.fast);
    let slow = ema(values, config.slow);
    let offset = config.slow - config.fast;
    let macd: Vec<f64> = slow
        .iter()
        .enumerate()
        .map(|(i, s)| fast[i + offset] - s)
        .collect();
    let signal = ema(&macd, config.signal);
    MacdLines {
        macd_start: config.slow - 1,
        macd,
        signal_start: config.slow + config.signal - 2,
        signal,
    }
}

fn macd_decision(macd: f64, signal: f64, price: f64) -> Prediction {
    let diff = macd - signal;
    if diff.abs() <= MACD_TIE_TOLERANCE * price {
        Prediction::Bullish
    } else {
        Prediction::from_sign(diff)
    }
}

/// Bullish iff MACD is above its signal line (ties, within a relative 1e-12 of the
/// price level, are Bullish).
pub fn predict_macd(history: &[f64], config: &MacdConfig) -> Result<Prediction> {
    let params = StrategyParams {
        macd: *config,
        ..StrategyParams::default()
    };
    let t = today(
        StrategyId::Macd,
        history,
        min_history(StrategyId::Macd, &params),
    )?;
    let lines = macd_lines(history, config);
    let (m, s) = (
        lines.macd_at(t).expect("defined past warm-up"),
        lines.signal_at(t).expect("defined past warm-up"),
    );
    Ok(macd_decision(m, s, history[t]))
}

/// Uniform entry point: any strategy, history `I(0..=t)`. Only RND consumes the stream.
pub fn predict(
    id: StrategyId,
    history: &[f64],
    params: &StrategyParams,
    stream: &mut RngStream,
) -> Result<Prediction> {
    match id {
        StrategyId::Rnd => Ok(predict_rnd(stream)),
        StrategyId::Mom => predict_mom(history, &params.momentum),
        StrategyId::Rsi => predict_rsi(history, &params.rsi),
        StrategyId::Upd => predict_upd(history),
        StrategyId::Macd => predict_macd(history, &params.macd),
    }
}

/// Predictions of a deterministic strategy for every day of `values` in one pass;
/// `None` before warm-up. Element `t` equals `predict` on `values[..=t]`.
///
/// # Panics
/// On `StrategyId::Rnd`, which has no history-determined path.
pub fn prediction_path(
    id: StrategyId,
    values: &[f64],
    params: &StrategyParams,
) -> Vec<Option<Prediction>> {
    let warm = min_history(id, params);
    let mut out = vec![None; values.len()];
    match id {
        StrategyId::Rnd => panic!("RND predictions come from a random stream"),
        StrategyId::Mom => {
            let tau = params.momentum.tau;
            for t in warm..values.len() {
                out[t] = Some(Prediction::from_sign(values[t] - values[t - tau]));
            }
        }
        StrategyId::Upd => {
            for t in warm..values.len() {
                out[t] = predict_upd(&values[..=t]).ok();
            }
        }
        StrategyId::Rsi => {
            let cfg = params.rsi;
            let rsi: Vec<f64> = (0..values.len())
                .map(|k| rsi_value(values, k, cfg.lookback).unwrap_or(f64::NAN))
                .collect();
            for t in warm..values.len() {
                let lo = t - cfg.divergence_window;
                out[t] = Some(rsi_decision(&values[lo..t], &rsi[lo..t]));
            }
        }
        StrategyId::Macd => {
            let lines = macd_lines(values, &params.macd);
            for t in warm..values.len() {
                if let (Some(m), Some(s)) = (lines.macd_at(t), lines.signal_at(t)) {
                    out[t] = Some(macd_decision(m, s, values[t]));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win,
    Loss,
    Flat,
}

/// Scores a prediction against the realised move `i_t -> i_next`.
pub fn evaluate_prediction(p: Prediction, i_t: f64, i_next: f64) -> Outcome {
    if i_next == i_t {
        return Outcome::Flat;
    }
    let up = i_next > i_t;
    match (p, up) {
        (Prediction::Bullish, true) | (Prediction::Bearish, false) => Outcome::Win,
        _ => Outcome::Loss,
    }
}
