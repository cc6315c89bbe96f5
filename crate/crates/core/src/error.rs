use std::path::PathBuf;

use crate::strategies::StrategyId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series too short: need at least {min} values, got {actual}")]
    Length { min: usize, actual: usize },

    #[error("price at index {index} must be finite and > 0, got {value}")]
    InvalidPrice { index: usize, value: f64 },

    #[error("{labels} labels supplied for {values} values")]
    LabelCount { labels: usize, values: usize },

    #[error("labels must be strictly increasing (index {index})")]
    LabelOrder { index: usize },

    #[error("invalid range [{lo}, {hi}) for length {len}")]
    Range { lo: usize, hi: usize, len: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("missing column \"{column}\"")]
    Schema { column: String },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row}: date is not after the previous row")]
    Ordering { row: usize },

    #[error("degenerate fit: only {usable} usable (n, sigma) points, need at least 5")]
    DegenerateFit { usable: usize },

    #[error("{strategy} needs t >= {needed}, got t = {t}")]
    History {
        strategy: StrategyId,
        needed: usize,
        t: usize,
    },

    #[error("window [{lo}, {hi}) has no countable days for {strategy}")]
    DegenerateWindow {
        strategy: StrategyId,
        lo: usize,
        hi: usize,
    },

    #[error("N_w = {n_windows}, window {window}: {source}")]
    Window {
        n_windows: usize,
        window: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
