//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not on the boundary (signed distance {sd:e})")]
    NotOnBoundary { sd: f64 },

    #[error("no inward normal available at this point: {reason}")]
    EmptyNormalCone { reason: String },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("projection failed after {iterations} iterations (residual {residual:e})")]
    ProjectionFailed { iterations: usize, residual: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("problem size {got} exceeds limit {limit} for {what}")]
    SizeLimit {
        what: String,
        got: usize,
        limit: usize,
    },

    #[error("time grids do not match: {reason}")]
    GridMismatch { reason: String },

    #[error("histogram binning mismatch: {reason}")]
    BinningMismatch { reason: String },

    #[error("CFL condition violated: dt {dt:e} > limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("negative density {value:e} in cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("solver did not converge: {what}")]
    Unconverged { what: String },

    #[error("unknown registry entry {name:?} for {registry}")]
    UnknownName { registry: String, name: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
