use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty system (order 0)")]
    Empty,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("singular matrix: no admissible pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },

    #[error("matrix is reducible")]
    NotIrreducible,

    #[error("power iteration did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("spectral radius is zero")]
    ZeroSpectralRadius,

    #[error("non-positive steady-state price at index {index}")]
    NonpositivePrices { index: usize },

    #[error("integration produced a non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
