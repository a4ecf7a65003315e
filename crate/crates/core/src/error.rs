use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the repair stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("not a probability vector: {reason}")]
    NotAProbabilityVector { reason: String },

    #[error("point {0} is not on the support")]
    PointOffSupport(String),

    #[error("total sample weight is zero")]
    ZeroTotalWeight,

    #[error("group {0} has no weight")]
    EmptyGroup(String),

    #[error("distributions live on different supports")]
    SupportMismatch,

    #[error("support is invalid: {0}")]
    InvalidSupport(String),

    #[error("source has group mass at support index {index} where the pooled mass is zero")]
    DivisionBySupportHole { index: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cost weight {index} is {value}, weights must be strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("entropic regularisation must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("reference matrix entry ({row}, {col}) is {value}, must be positive")]
    NonPositiveReference { row: usize, col: usize, value: f64 },

    #[error("row {row} has zero mass but its marginal is {mass}")]
    ZeroRowWithMass { row: usize, mass: f64 },

    #[error("column {col} has zero mass but its marginal is {mass}")]
    ZeroColumnWithMass { col: usize, mass: f64 },

    #[error("matrix has zero total mass but target mass is {0}")]
    ZeroTotalMass(f64),

    #[error("band root{} is not bracketed within |x| <= {limit}", column.map(|c| format!(" for column {c}")).unwrap_or_default())]
    RootNotBracketed { column: Option<usize>, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("support is not evenly spaced scalar grid: {0}")]
    UnevenSupport(String),

    #[error("coupling row {row} sums to {actual}, marginal is {expected}")]
    MarginalMismatch {
        row: usize,
        expected: f64,
        actual: f64,
    },

    #[error("source point index {0} is unreachable under the projection map")]
    UnreachableSourcePoint(usize),

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("original sample {0} has no weighted pieces")]
    EmptySample(usize),

    #[error("privileged group has zero positive-prediction rate")]
    ZeroPrivilegedPositiveRate,

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("parse error at row {row}, column {column:?}: {message}")]
    ParseError {
        row: usize,
        column: String,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit status classes used by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Config(_)
            | InvalidArgument(_)
            | NonPositiveEpsilon(_)
            | NonPositiveWeight { .. }
            | Json(_) => ErrorClass::Config,
            RootNotBracketed { .. }
            | ZeroRowWithMass { .. }
            | ZeroColumnWithMass { .. }
            | ZeroTotalMass(_)
            | NonPositiveReference { .. }
            | MarginalMismatch { .. }
            | ZeroPrivilegedPositiveRate => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
