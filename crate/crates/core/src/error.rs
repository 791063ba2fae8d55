use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("direction must be a nonzero vector")]
    ZeroDirection,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("empty path or sample")]
    Empty,

    #[error("matrix is not positive semidefinite (pivot {pivot} = {value:e})")]
    NotPsd { pivot: usize, value: f64 },

    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("degenerate direction: eta' Sigma eta = {0:e} must be positive")]
    DegenerateDirection(f64),

    #[error("start point lies outside the closed half-space (<x, eta> = {0})")]
    OutsideHalfSpace(f64),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("enumeration of {0} sequences exceeds the 1e7 guard")]
    EnumerationTooLarge(u128),

    #[error("unsupported process for this operation: {0}")]
    Unsupported(String),

    #[error("csv error on line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
