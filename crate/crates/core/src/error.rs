//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AmgError>;

#[derive(Error, Debug)]
pub enum AmgError {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("index {index} out of range for dimension {bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("zero diagonal entry at row {0}")]
    ZeroDiagonal(usize),

    #[error("SVD failed to converge after {0} sweeps")]
    SvdNonConvergence(usize),

    #[error("F-point {0} has no strong C neighbor; rerun coarsening with the second pass enabled")]
    NoStrongCNeighbor(usize),

    #[error("matrix is numerically singular: sigma_min/sigma_max = {0:.3e}")]
    NearSingular(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("problem size {n} exceeds the dense analysis cap of {cap}")]
    AnalysisTooLarge { n: usize, cap: usize },

    #[error("indefinite direction at iteration {0} (p^T A p <= 0)")]
    Indefinite(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
