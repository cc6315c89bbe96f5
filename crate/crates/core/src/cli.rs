//! Command-line surface: `generate`, `hurst` and `backtest`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::backtest::{run_backtest, BacktestConfig, BacktestReport};
use crate::error::{Error, Result};
use crate::hurst::{hurst_global, hurst_sliding, DmaConfig, SlidingHurstConfig};
use crate::ingest::{generate, load_csv, to_csv_string, with_day_labels, CsvSpec, SyntheticKind, SyntheticSpec};
use crate::numfmt::format_sig;
use crate::report::{self, RunManifest, TOOL_VERSION};
use crate::rng::PRNG_ALGORITHM;
use crate::series::{compute_returns, fingerprint, PriceSeries};
use crate::strategies::{MacdConfig, MomentumConfig, RsiConfig, StrategyId, StrategyParams};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "NOISETRADER_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "noisetrader", version, about = "DMA Hurst analysis and random-vs-technical strategy backtests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic price series as CSV.
    Generate(GenerateArgs),
    /// Estimate the Hurst exponent, globally or over sliding windows.
    Hurst(HurstArgs),
    /// Windowed Monte-Carlo backtest of the five daily strategies.
    Backtest(BacktestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Gaussian,
    Drifted,
    Ar1,
}

impl From<KindArg> for SyntheticKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Gaussian => SyntheticKind::GaussianWalk,
            KindArg::Drifted => SyntheticKind::DriftedWalk,
            KindArg::Ar1 => SyntheticKind::AR1Walk,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 5000)]
    pub length: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub start_price: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step_vol: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub drift: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
}

impl SyntheticArgs {
    fn spec(&self, kind: KindArg, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            kind: kind.into(),
            length: self.length,
            seed,
            start_price: self.start_price,
            step_volatility: self.step_vol,
            drift: self.drift,
            phi: self.phi,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with one row per trading day.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "date")]
    pub date_column: String,
    #[arg(long, default_value = "close")]
    pub price_column: String,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The file has no header row; columns are addressed by index ("0", "1", ...).
    #[arg(long)]
    pub no_header: bool,
    /// Use a generated series instead of a file.
    #[arg(long, value_enum)]
    pub synthetic: Option<KindArg>,
    #[command(flatten)]
    pub synth: SyntheticArgs,
    /// Output directory [default: $NOISETRADER_OUT_DIR or "."].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self, data_seed: u64) -> Result<(PriceSeries, serde_json::Value)> {
        match (&self.input, self.synthetic) {
            (Some(path), _) => {
                let spec = CsvSpec {
                    path: path.clone(),
                    date_column: self.date_column.clone(),
                    price_column: self.price_column.clone(),
                    delimiter: self.delimiter,
                    has_header: !self.no_header,
                };
                let series = load_csv(&spec)?;
                Ok((series, json!({ "csv": spec })))
            }
            (None, Some(kind)) => {
                let spec = self.synth.spec(kind, data_seed);
                Ok((generate(&spec)?, json!({ "synthetic": spec })))
            }
            (None, None) => Err(Error::Parameter("need --input or --synthetic".into())),
        }
    }

    fn out_dir(&self) -> PathBuf {
        resolve_out_dir(self.out_dir.as_deref())
    }
}

fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub synth: SyntheticArgs,
    /// Target CSV path; relative paths resolve against $NOISETRADER_OUT_DIR when set.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HurstMode {
    Global,
    Sliding,
}

#[derive(Debug, Clone, Args)]
pub struct HurstArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Seed of the synthetic series.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "global")]
    pub mode: HurstMode,
    /// Sliding window size N_s.
    #[arg(long, default_value_t = 1000)]
    pub ns: usize,
    /// Sliding step s.
    #[arg(long, default_value_t = 20)]
    pub step: usize,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 50)]
    pub n_points: usize,
    /// Detrend log prices instead of prices.
    #[arg(long)]
    pub log_prices: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Master seed of the random strategy.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed of the synthetic series [default: --seed].
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Window counts N_w.
    #[arg(long, value_delimiter = ',', default_value = "3,9,18,30")]
    pub windows: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, value_delimiter = ',', default_value = "rnd,mom,rsi,upd,macd")]
    pub strategies: Vec<String>,
    #[arg(long, default_value_t = 7)]
    pub tau_m: usize,
    #[arg(long, default_value_t = 14)]
    pub tau_rsi: usize,
    #[arg(long, default_value_t = 14)]
    pub t_rsi: usize,
    #[arg(long, default_value_t = 12)]
    pub macd_fast: usize,
    #[arg(long, default_value_t = 26)]
    pub macd_slow: usize,
    #[arg(long, default_value_t = 9)]
    pub macd_signal: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

impl BacktestArgs {
    pub fn config(&self) -> Result<BacktestConfig> {
        let strategies = self
            .strategies
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<StrategyId>>>()?;
        Ok(BacktestConfig {
            window_counts: self.windows.clone(),
            runs: self.runs,
            seed: self.seed,
            strategies,
            params: StrategyParams {
                momentum: MomentumConfig { tau: self.tau_m },
                rsi: RsiConfig {
                    lookback: self.tau_rsi,
                    divergence_window: self.t_rsi,
                },
                macd: MacdConfig {
                    fast: self.macd_fast,
                    slow: self.macd_slow,
                    signal: self.macd_signal,
                },
            },
        })
    }
}

fn manifest(
    command: &str,
    input: serde_json::Value,
    series: &PriceSeries,
    config: serde_json::Value,
    seed: Option<u64>,
) -> RunManifest {
    RunManifest {
        command: command.into(),
        input,
        input_fingerprint: fingerprint(series),
        config,
        seed,
        prng: PRNG_ALGORITHM.into(),
        version: TOOL_VERSION.into(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        outputs: Vec::new(),
    }
}

/// What a command produced: files written and a short human-readable summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<Outcome> {
    let spec = args.synth.spec(args.kind, args.seed);
    let series = with_day_labels(generate(&spec)?);
    let target = if args.out.is_absolute() {
        args.out.clone()
    } else {
        resolve_out_dir(None).join(&args.out)
    };
    let dir = target
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let name = target
        .file_name()
        .ok_or_else(|| Error::Parameter(format!("bad output path {}", target.display())))?
        .to_string_lossy()
        .into_owned();
    let stem = target
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| name.clone());
    let m = manifest(
        "generate",
        json!({ "synthetic": spec }),
        &series,
        json!({}),
        Some(spec.seed),
    );
    let files = report::write_bundle(
        &dir,
        &[(name, to_csv_string(&series))],
        &format!("{stem}.manifest.json"),
        m,
    )?;
    Ok(Outcome {
        files,
        summary: format!("wrote {} days to {}", series.len(), target.display()),
    })
}

pub fn cmd_hurst(args: &HurstArgs) -> Result<Outcome> {
    let (series, input) = args.input.load(args.seed)?;
    let dma = DmaConfig {
        n_min: args.n_min,
        n_points: args.n_points,
        log_prices: args.log_prices,
    };
    let dir = args.input.out_dir();
    match args.mode {
        HurstMode::Global => {
            let est = hurst_global(&series, &dma)?;
            let m = manifest(
                "hurst",
                input,
                &series,
                json!({ "mode": "global", "dma": dma }),
                args.input.synthetic.map(|_| args.seed),
            );
            let files = report::write_bundle(
                &dir,
                &[
                    ("hurst_points.csv".into(), report::fit_points_csv(&est)),
                    ("hurst_summary.csv".into(), report::hurst_summary_csv(&est)),
                ],
                "hurst.manifest.json",
                m,
            )?;
            Ok(Outcome {
                files,
                summary: format!(
                    "H={} r2={} intercept={} points={}",
                    format_sig(est.h),
                    format_sig(est.r_squared),
                    format_sig(est.intercept),
                    est.points.len()
                ),
            })
        }
        HurstMode::Sliding => {
            let cfg = SlidingHurstConfig {
                window_size: args.ns,
                step: args.step,
                dma,
            };
            let points = hurst_sliding(&series, &cfg)?;
            let m = manifest(
                "hurst",
                input,
                &series,
                json!({ "mode": "sliding", "sliding": cfg }),
                args.input.synthetic.map(|_| args.seed),
            );
            let files = report::write_bundle(
                &dir,
                &[("hurst_sliding.csv".into(), report::sliding_csv(&points))],
                "hurst.manifest.json",
                m,
            )?;
            let mean = points.iter().map(|p| p.h).sum::<f64>() / points.len() as f64;
            Ok(Outcome {
                files,
                summary: format!("{} windows, mean H={}", points.len(), format_sig(mean)),
            })
        }
    }
}

fn summary_table(report: &BacktestReport) -> String {
    let mut out = String::new();
    for set in &report.window_sets {
        out.push_str(&format!("N_w = {}\n", set.n_windows));
        for s in &set.summary {
            out.push_str(&format!(
                "  {:<5} mean {:>8.3}%  std {:>7.3}\n",
                s.strategy.as_str(),
                s.mean_win_pct,
                s.std_win_pct
            ));
        }
    }
    out
}

pub fn cmd_backtest(args: &BacktestArgs) -> Result<Outcome> {
    let config = args.config()?;
    let (series, input) = args.input.load(args.data_seed.unwrap_or(args.seed))?;
    let report = run_backtest(&series, &config)?;
    let returns = compute_returns(&series);
    let files: Vec<(String, String)> = match args.format {
        Format::Csv => vec![
            ("backtest_windows.csv".into(), report::windows_csv(&report)),
            ("backtest_summary.csv".into(), report::summary_csv(&report)),
            ("returns.csv".into(), report::returns_csv(&returns)),
        ],
        Format::Json => vec![(
            "backtest.json".into(),
            report::backtest_json(&report, &returns)?,
        )],
    };
    let m = manifest(
        "backtest",
        input,
        &series,
        serde_json::to_value(&config)?,
        Some(config.seed),
    );
    let written = report::write_bundle(&args.input.out_dir(), &files, "backtest.manifest.json", m)?;
    Ok(Outcome {
        files: written,
        summary: summary_table(&report),
    })
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Hurst(a) => cmd_hurst(a),
        Command::Backtest(a) => cmd_backtest(a),
    }
}
