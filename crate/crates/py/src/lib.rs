//! Python bindings for `noisetrader_core`.
//!
//! Series are exposed as a `PriceSeries` class; everything else comes back as plain
//! Python lists, tuples and dicts. Library errors surface as `ValueError`, file errors
//! as `OSError`.

use std::str::FromStr;

use chrono::NaiveDate;
use noisetrader_core as core;
use noisetrader_core::backtest::BacktestConfig;
use noisetrader_core::hurst::{DmaConfig, SlidingHurstConfig};
use noisetrader_core::ingest::{CsvSpec, SyntheticKind, SyntheticSpec};
use noisetrader_core::strategies::StrategyId;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

fn py_err(e: core::Error) -> PyErr {
    match e {
        core::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let tree = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &tree)
}

/// Daily closing prices with optional ISO date labels.
#[pyclass(name = "PriceSeries", frozen)]
struct PyPriceSeries {
    inner: core::PriceSeries,
}

#[pymethods]
impl PyPriceSeries {
    #[new]
    #[pyo3(signature = (values, labels=None))]
    fn new(values: Vec<f64>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let inner = match labels {
            None => core::PriceSeries::new(values),
            Some(labels) => {
                let dates = labels
                    .iter()
                    .map(|s| {
                        NaiveDate::parse_from_str(s, "%Y-%m-%d")
                            .map_err(|e| PyValueError::new_err(format!("bad date {s:?}: {e}")))
                    })
                    .collect::<PyResult<Vec<_>>>()?;
                core::PriceSeries::with_labels(values, dates)
            }
        }
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<String>> {
        self.inner
            .labels()
            .map(|l| l.iter().map(|d| d.to_string()).collect())
    }

    fn fingerprint(&self) -> String {
        core::series::fingerprint(&self.inner)
    }

    fn slice(&self, lo: usize, hi: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.slice(lo, hi).map_err(py_err)?,
        })
    }

    fn to_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        core::write_csv(&self.inner, &path).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PriceSeries(len={})", self.inner.len())
    }
}

fn parse_kind(kind: &str) -> PyResult<SyntheticKind> {
    match kind.to_ascii_lowercase().as_str() {
        "gaussian" => Ok(SyntheticKind::GaussianWalk),
        "drifted" => Ok(SyntheticKind::DriftedWalk),
        "ar1" => Ok(SyntheticKind::AR1Walk),
        other => Err(PyValueError::new_err(format!(
            "unknown kind {other:?}; expected gaussian, drifted or ar1"
        ))),
    }
}

/// Seeded synthetic price path.
#[pyfunction]
#[pyo3(signature = (kind, length, seed, start_price=1000.0, step_volatility=0.01, drift=0.0, phi=0.0))]
fn generate(
    kind: &str,
    length: usize,
    seed: u64,
    start_price: f64,
    step_volatility: f64,
    drift: f64,
    phi: f64,
) -> PyResult<PyPriceSeries> {
    let spec = SyntheticSpec {
        start_price,
        step_volatility,
        drift,
        phi,
        ..SyntheticSpec::new(parse_kind(kind)?, length, seed)
    };
    Ok(PyPriceSeries {
        inner: core::generate(&spec).map_err(py_err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (path, date_column="date", price_column="close", delimiter=',', has_header=true))]
fn load_csv(
    path: std::path::PathBuf,
    date_column: &str,
    price_column: &str,
    delimiter: char,
    has_header: bool,
) -> PyResult<PyPriceSeries> {
    let spec = CsvSpec {
        date_column: date_column.into(),
        price_column: price_column.into(),
        delimiter,
        has_header,
        ..CsvSpec::new(path)
    };
    Ok(PyPriceSeries {
        inner: core::load_csv(&spec).map_err(py_err)?,
    })
}

#[pyfunction]
fn compute_returns(series: &PyPriceSeries) -> Vec<f64> {
    core::compute_returns(&series.inner).values().to_vec()
}

/// Population variance of the returns in `[lo, hi)`.
#[pyfunction]
fn volatility(series: &PyPriceSeries, lo: usize, hi: usize) -> PyResult<f64> {
    core::volatility(&core::compute_returns(&series.inner), lo, hi).map_err(py_err)
}

#[pyfunction]
fn dma_sigma(values: Vec<f64>, n: usize) -> PyResult<f64> {
    core::dma_sigma(&values, n).map_err(py_err)
}

/// Returns a dict with `h`, `r_squared`, `intercept` and the `(n, sigma)` fit points.
#[pyfunction]
#[pyo3(signature = (series, n_min=2, n_points=50, log_prices=false))]
fn hurst_global<'py>(
    py: Python<'py>,
    series: &PyPriceSeries,
    n_min: usize,
    n_points: usize,
    log_prices: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = DmaConfig {
        n_min,
        n_points,
        log_prices,
    };
    let est = py
        .detach(|| core::hurst_global(&series.inner, &cfg))
        .map_err(py_err)?;
    serialize(py, &est)
}

/// List of `(t, h)` pairs, `t` being the first day of each window.
#[pyfunction]
#[pyo3(signature = (series, window_size=1000, step=20, n_min=2, n_points=50, log_prices=false))]
fn hurst_sliding(
    py: Python<'_>,
    series: &PyPriceSeries,
    window_size: usize,
    step: usize,
    n_min: usize,
    n_points: usize,
    log_prices: bool,
) -> PyResult<Vec<(usize, f64)>> {
    let cfg = SlidingHurstConfig {
        window_size,
        step,
        dma: DmaConfig {
            n_min,
            n_points,
            log_prices,
        },
    };
    let points = py
        .detach(|| core::hurst_sliding(&series.inner, &cfg))
        .map_err(py_err)?;
    Ok(points.into_iter().map(|p| (p.t, p.h)).collect())
}

/// `[(lo, hi), ...]` day ranges of the `n_windows` trading windows.
#[pyfunction]
fn partition(length: usize, n_windows: usize) -> PyResult<Vec<(usize, usize)>> {
    Ok(core::partition(length, n_windows)
        .map_err(py_err)?
        .into_iter()
        .map(|r| (r.lo, r.hi))
        .collect())
}

/// Full report as nested dicts, mirroring the JSON output of the CLI.
#[pyfunction]
#[pyo3(signature = (series, window_counts=None, runs=10, seed=0, strategies=None))]
fn run_backtest<'py>(
    py: Python<'py>,
    series: &PyPriceSeries,
    window_counts: Option<Vec<usize>>,
    runs: usize,
    seed: u64,
    strategies: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let defaults = BacktestConfig::default();
    let strategies = match strategies {
        None => defaults.strategies.clone(),
        Some(names) => names
            .iter()
            .map(|s| StrategyId::from_str(s).map_err(py_err))
            .collect::<PyResult<_>>()?,
    };
    let config = BacktestConfig {
        window_counts: window_counts.unwrap_or(defaults.window_counts.clone()),
        runs,
        seed,
        strategies,
        ..defaults
    };
    let report = py
        .detach(|| core::run_backtest(&series.inner, &config))
        .map_err(py_err)?;
    serialize(py, &report)
}

#[pymodule]
fn noisetrader(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPriceSeries>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(compute_returns, m)?)?;
    m.add_function(wrap_pyfunction!(volatility, m)?)?;
    m.add_function(wrap_pyfunction!(dma_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(hurst_global, m)?)?;
    m.add_function(wrap_pyfunction!(hurst_sliding, m)?)?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(run_backtest, m)?)?;
    Ok(())
}
