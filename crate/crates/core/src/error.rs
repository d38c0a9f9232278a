use thiserror::Error;

use crate::instance::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {what} = {index} (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),

    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("infeasible cardinality: {0}")]
    InfeasibleCardinality(String),

    #[error("invalid LP: {0}")]
    InvalidLp(String),

    #[error("numerically singular basis at iteration {iteration} (pivot {pivot:.3e})")]
    SingularBasis { iteration: usize, pivot: f64 },

    #[error("enumeration refused: {0}")]
    EnumerationCap(String),

    #[error("malformed instance name {name:?}: unexpected {token:?}")]
    Name { name: String, token: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
