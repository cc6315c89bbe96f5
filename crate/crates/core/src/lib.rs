//! Hurst exponent estimation by detrended moving average, and a windowed Monte-Carlo
//! comparison of a random daily predictor against momentum, RSI, up-and-down
//! persistency and MACD predictors.

pub mod backtest;
pub mod cli;
pub mod error;
pub mod hurst;
pub mod ingest;
pub mod numfmt;
pub mod report;
pub mod rng;
pub mod series;
pub mod strategies;

pub use backtest::{partition, run_backtest, run_window, BacktestConfig, BacktestReport};
pub use error::{Error, Result};
pub use hurst::{dma_sigma, hurst_global, hurst_sliding, DmaConfig, HurstEstimate, SlidingHurstConfig};
pub use ingest::{generate, load_csv, write_csv, CsvSpec, SyntheticKind, SyntheticSpec};
pub use series::{compute_returns, volatility, PriceSeries, Prediction, ReturnsSeries};
pub use strategies::{StrategyId, StrategyParams};
