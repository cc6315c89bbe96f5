//! CSV loading/writing and seeded synthetic series.

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::format_sig;
use crate::series::PriceSeries;

/// Lower bound on a generated relative step, keeping every price positive.
pub const MIN_RELATIVE_STEP: f64 = -0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSpec {
    pub path: PathBuf,
    pub date_column: String,
    pub price_column: String,
    pub delimiter: char,
    pub has_header: bool,
}

impl CsvSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            date_column: "date".into(),
            price_column: "close".into(),
            delimiter: ',',
            has_header: true,
        }
    }

    fn validate(&self) -> Result<u8> {
        if !self.delimiter.is_ascii() || self.delimiter.is_ascii_control() && self.delimiter != '\t'
        {
            return Err(Error::Parameter(format!(
                "delimiter must be a single printable ASCII character, got {:?}",
                self.delimiter
            )));
        }
        if self.price_column.is_empty() || self.date_column.is_empty() {
            return Err(Error::Parameter("column names must be non-empty".into()));
        }
        Ok(self.delimiter as u8)
    }
}

/// Column lookup: by header name, or by zero-based index for headerless files.
fn column_index(headers: Option<&csv::StringRecord>, name: &str) -> Option<usize> {
    match headers {
        Some(h) => h.iter().position(|c| c.trim() == name),
        None => name.parse().ok(),
    }
}

/// Reads a price series from CSV.
///
/// Rows are taken in file order. A missing price column is a schema error; a missing
/// date column just means the series carries no labels. Dates populate labels only
/// when every row parses as an ISO-8601 calendar date, and must then be strictly
/// increasing. Malformed rows abort the load.
pub fn load_csv(spec: &CsvSpec) -> Result<PriceSeries> {
    let delimiter = spec.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(spec.has_header)
        .flexible(true)
        .from_path(&spec.path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(&spec.path, io),
            other => Error::Parameter(format!("{other:?}")),
        })?;

    let headers = if spec.has_header {
        Some(reader.headers()?.clone())
    } else {
        None
    };
    let price_idx =
        column_index(headers.as_ref(), &spec.price_column).ok_or_else(|| Error::Schema {
            column: spec.price_column.clone(),
        })?;
    let date_idx = column_index(headers.as_ref(), &spec.date_column);

    let mut values = Vec::new();
    let mut dates = Vec::new();
    let mut dates_ok = date_idx.is_some();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let raw = record.get(price_idx).ok_or_else(|| Error::Parse {
            row,
            message: format!("no field at column {price_idx}"),
        })?;
        let value: f64 = raw.trim().parse().map_err(|_| Error::Parse {
            row,
            message: format!("price {raw:?} is not numeric"),
        })?;
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Parse {
                row,
                message: format!("price {raw:?} must be positive"),
            });
        }
        values.push(value);

        if let (true, Some(idx)) = (dates_ok, date_idx) {
            match record
                .get(idx)
                .and_then(|d| NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d").ok())
            {
                Some(date) => {
                    if dates.last().is_some_and(|prev| *prev >= date) {
                        return Err(Error::Ordering { row });
                    }
                    dates.push(date);
                }
                None => dates_ok = false,
            }
        }
    }

    if values.len() < 2 {
        return Err(Error::Length {
            min: 2,
            actual: values.len(),
        });
    }
    if dates_ok {
        PriceSeries::with_labels(values, dates)
    } else {
        PriceSeries::new(values)
    }
}

/// CSV text for a series: `date,close` when labelled, `close` otherwise.
pub fn to_csv_string(series: &PriceSeries) -> String {
    let mut out = String::with_capacity(series.len() * 24);
    match series.labels() {
        Some(labels) => {
            out.push_str("date,close\n");
            for (d, v) in labels.iter().zip(series.values()) {
                out.push_str(&format!("{},{}\n", d.format("%Y-%m-%d"), format_sig(*v)));
            }
        }
        None => {
            out.push_str("close\n");
            for v in series.values() {
                out.push_str(&format_sig(*v));
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_csv(series: &PriceSeries, path: &Path) -> Result<()> {
    write_atomic(path, to_csv_string(series).as_bytes())
}

/// Writes to a temp file in the target directory, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyntheticKind {
    GaussianWalk,
    DriftedWalk,
    AR1Walk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub length: usize,
    pub seed: u64,
    pub start_price: f64,
    pub step_volatility: f64,
    /// Mean relative step; used by `DriftedWalk` only.
    pub drift: f64,
    /// Lag-1 coefficient of the relative steps; used by `AR1Walk` only.
    pub phi: f64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, length: usize, seed: u64) -> Self {
        Self {
            kind,
            length,
            seed,
            start_price: 1000.0,
            step_volatility: 0.01,
            drift: 0.0,
            phi: 0.0,
        }
    }

    pub fn gaussian(length: usize, seed: u64) -> Self {
        Self::new(SyntheticKind::GaussianWalk, length, seed)
    }

    pub fn ar1(length: usize, seed: u64, phi: f64) -> Self {
        Self {
            phi,
            ..Self::new(SyntheticKind::AR1Walk, length, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.into()));
        if self.length < 2 {
            return bad("length must be >= 2");
        }
        if !(self.start_price.is_finite() && self.start_price > 0.0) {
            return bad("start_price must be > 0");
        }
        if !(self.step_volatility.is_finite() && self.step_volatility > 0.0) {
            return bad("step_volatility must be > 0");
        }
        if !self.drift.is_finite() {
            return bad("drift must be finite");
        }
        if self.phi.is_nan() || self.phi.abs() >= 1.0 {
            return bad("|phi| must be < 1");
        }
        Ok(())
    }
}

/// Multiplicative walk `I(t+1) = I(t) * (1 + e_t)` with `e_t >= -0.5`.
///
/// Same spec, same output, bit for bit. For `AR1Walk` the steps follow
/// `e_t = phi * e_{t-1} + u_t` with innovations scaled so the stationary standard
/// deviation of `e_t` equals `step_volatility`.
pub fn generate(spec: &SyntheticSpec) -> Result<PriceSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut z = move || -> f64 { StandardNormal.sample(&mut rng) };
    let vol = spec.step_volatility;

    let mut values = Vec::with_capacity(spec.length);
    values.push(spec.start_price);
    let mut prev_step = 0.0;
    for i in 1..spec.length {
        let step = match spec.kind {
            SyntheticKind::GaussianWalk => vol * z(),
            SyntheticKind::DriftedWalk => spec.drift + vol * z(),
            SyntheticKind::AR1Walk => {
                let e = if i == 1 {
                    vol * z()
                } else {
                    spec.phi * prev_step + vol * (1.0 - spec.phi * spec.phi).sqrt() * z()
                };
                prev_step = e;
                e
            }
        };
        let last = values[i - 1];
        values.push(last * (1.0 + step.max(MIN_RELATIVE_STEP)));
    }
    PriceSeries::new(values)
}

/// Attaches consecutive calendar-day labels starting at 2000-01-01.
pub fn with_day_labels(series: PriceSeries) -> PriceSeries {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let labels = (0..series.len())
        .map(|i| start + Days::new(i as u64))
        .collect();
    PriceSeries::with_labels(series.values().to_vec(), labels).expect("labels are increasing")
}
