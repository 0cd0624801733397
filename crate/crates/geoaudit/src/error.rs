use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("target must be 0 or 1, row {row} has {value}")]
    NonBinaryTarget { row: usize, value: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("unknown category {value:?} for column {column:?} at line {line}")]
    UnknownCategory {
        column: String,
        value: String,
        line: usize,
    },

    #[error("malformed row at line {line}: expected {expected} columns, got {got}")]
    MalformedRow {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("degenerate split: train={train} test={test}")]
    DegenerateSplit { train: usize, test: usize },

    #[error("no rows selected for counterfactual mutation")]
    NoRowsSelected,

    #[error("no eligible rows: original and modified data are identical")]
    ZeroEligibleRows,

    #[error("schema error: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure in stage {stage}: {reason}")]
    NumericFailure { stage: String, reason: String },

    #[error("missing ERM reference entry in cost comparison")]
    MissingReference,

    #[error("unsupported report format {0:?}")]
    UnsupportedFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 config, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } | Error::UnsupportedFormat(_) => 1,
            Error::NumericFailure { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
