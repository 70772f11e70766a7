use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Why a single input row was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RowError {
    #[error("feature dimension {found} does not match expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature {index} is not finite")]
    NonFiniteFeature { index: usize },
    #[error("empty feature vector")]
    EmptyFeatures,
    #[error("label must be 0 or 1, got {0}")]
    BadLabel(i64),
    #[error("pred must be 0 or 1, got {0}")]
    BadPrediction(i64),
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("no rows to build a dataset from")]
    EmptyDataset,
    #[error("row {row}: {source}")]
    InvalidRow {
        row: usize,
        #[source]
        source: RowError,
    },
    #[error("expected exactly two distinct groups, found {found}: {names:?}")]
    GroupCardinality { found: usize, names: Vec<String> },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    InvalidLine {
        line: usize,
        #[source]
        source: RowError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("requested {k} clusters but dataset has only {n} instances")]
    TooManyClusters { k: usize, n: usize },
    #[error("subgroup AUC requires a score on every instance")]
    MissingScore,
    #[error("no instance in the cluster carries text")]
    NoText,
    #[error("subset is degenerate for this metric: {0}")]
    Degenerate(&'static str),
    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),
    #[error("generator could not reach global parity after {attempts} attempts (last gap {last_gap})")]
    ResamplingExhausted { attempts: usize, last_gap: f64 },
    #[error("brute-force search space {size} exceeds limit {limit}")]
    InstanceTooLarge { size: f64, limit: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
