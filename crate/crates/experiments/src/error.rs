use std::path::PathBuf;

use polya_core::analytic::AnalyticError;
use polya_core::election::SplitError;
use polya_core::stats::StatsError;
use polya_core::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("unknown plot kind {0:?}")]
    UnknownPlotKind(String),
    #[error("{0}")]
    Usage(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("apportionment failed: {0}")]
    Apportionment(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: malformed dataset: {reason}")]
    MalformedDataset { path: PathBuf, reason: String },
}

impl ExperimentError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 for bad input, 3 for I/O failures.
    /// (2 is reserved for failed validation runs.)
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Io { .. } | ExperimentError::Csv { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;
