use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: need {needed}, got {got} ({what})")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("matrix is not symmetric (|a[{row}][{col}] - a[{col}][{row}]| = {gap})")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("rank-deficient design matrix (column {0})")]
    RankDeficient(usize),

    #[error("optimizer failed: {0}")]
    Convergence(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("row {row}: cannot parse {value:?} as a number")]
    Parse { row: usize, value: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable code, used by the CLI error envelope.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::Degenerate(_) => "degenerate",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::RankDeficient(_) => "rank_deficient",
            Error::Convergence(_) => "convergence",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::MissingFile(_) => "missing_file",
            Error::MissingColumn(_) => "missing_column",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

