//! Price and return series, the substrate every other module works on.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Ordered daily closing values `I(t)`, `t = 0..T`, with optional date labels.
///
/// Construction validates that there are at least two values, that every value is
/// finite and strictly positive, and that labels (when given) match the value count
/// and are strictly increasing. Once built a series is immutable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    values: Vec<f64>,
    labels: Option<Vec<NaiveDate>>,
}

impl PriceSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::build(values, None)
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<NaiveDate>) -> Result<Self> {
        Self::build(values, Some(labels))
    }

    fn build(values: Vec<f64>, labels: Option<Vec<NaiveDate>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Length {
                min: 2,
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidPrice { index, value });
        }
        if let Some(labels) = &labels {
            if labels.len() != values.len() {
                return Err(Error::LabelCount {
                    labels: labels.len(),
                    values: values.len(),
                });
            }
            if let Some(i) = labels.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::LabelOrder { index: i + 1 });
            }
        }
        Ok(Self { values, labels })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[NaiveDate]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a valid series holds at least two values.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous sub-series `[lo, hi)`, labels included.
    pub fn slice(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi > self.len() {
            return Err(Error::Range {
                lo,
                hi,
                len: self.len(),
            });
        }
        let labels = self.labels.as_ref().map(|l| l[lo..hi].to_vec());
        Self::build(self.values[lo..hi].to_vec(), labels)
    }

    /// Series with every value mapped through `ln`.
    pub fn ln(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.ln()).collect()
    }
}

/// Relative daily returns `r(t) = [I(t+1) - I(t)] / I(t)`, length `T - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsSeries {
    values: Vec<f64>,
}

impl ReturnsSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Directional forecast for `I(t+1) - I(t)`. There is no abstain state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prediction {
    Bullish,
    Bearish,
}

impl Prediction {
    /// Bullish for `x >= 0`. Zero resolves to Bullish, the global tie rule.
    pub fn from_sign(x: f64) -> Self {
        if x < 0.0 {
            Prediction::Bearish
        } else {
            Prediction::Bullish
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Prediction::Bullish => Prediction::Bearish,
            Prediction::Bearish => Prediction::Bullish,
        }
    }
}

/// SHA-256 over the little-endian bytes of the values, hex encoded.
pub fn fingerprint(series: &PriceSeries) -> String {
    let mut hasher = Sha256::new();
    for v in series.values() {
        hasher.update(v.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

pub fn compute_returns(series: &PriceSeries) -> ReturnsSeries {
    let values = series
        .values()
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0])
        .collect();
    ReturnsSeries { values }
}

/// Population variance (divide by count) of `returns[lo..hi)`.
pub fn volatility(returns: &ReturnsSeries, lo: usize, hi: usize) -> Result<f64> {
    if lo >= hi || hi > returns.len() {
        return Err(Error::Range {
            lo,
            hi,
            len: returns.len(),
        });
    }
    // Welford accumulation
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in returns.values[lo..hi].iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok((m2 / (hi - lo) as f64).max(0.0))
}
