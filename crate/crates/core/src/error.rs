use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table must contain at least one record")]
    EmptyTable,
    #[error("invalid attribute roles: {0}")]
    Roles(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth { row: usize, found: usize, expected: usize },
    #[error("unknown column `{0}` (no role declared for it)")]
    UnknownColumn(String),
    #[error("column `{0}` declared in roles but missing from the header")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a real number")]
    Parse { row: usize, column: String, value: String },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("no rows left after dropping records with missing values")]
    NoSurvivingRows,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("value {0} does not occur in the support")]
    OutsideSupport(f64),
    #[error("distributions have different supports")]
    SupportMismatch,
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
