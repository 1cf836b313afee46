use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinflowError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have dimension at least 1")]
    Empty,

    #[error("matrix `{name}` contains a non-finite entry at ({row}, {col})")]
    NonFinite { name: String, row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical failure in {context}: {detail}")]
    NumericalFailure { context: String, detail: String },

    #[error(
        "ill-conditioned Jordan basis (condition number {condition:.3e}); try loosening rank_tol or eig_cluster_tol"
    )]
    IllConditioned { condition: f64 },

    #[error("similar Jordan structure but no numerically invertible intertwiner found after {draws} draws")]
    NoInvertibleWitness { draws: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension {dim}: {detail}")]
    UnsupportedDimension { dim: usize, detail: String },

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("invalid tolerance profile: {0}")]
    InvalidTolerance(String),

    #[error("degenerate sample spread: {0}")]
    DegenerateSamples(String),
}

pub type Result<T, E = LinflowError> = std::result::Result<T, E>;

impl LinflowError {
    pub(crate) fn numerical(context: &str, detail: impl Into<String>) -> Self {
        LinflowError::NumericalFailure {
            context: context.to_string(),
            detail: detail.into(),
        }
    }
}
