use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not {kind} (residual {residual:.3e})")]
    InvalidMatrix { kind: &'static str, residual: f64 },

    #[error("hermitian eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index map is not a bijection of 0..{dim}: {detail}")]
    NotBijective { dim: usize, detail: String },

    #[error("word has {len} letters after merging, guard is {guard}")]
    LengthGuard { len: usize, guard: usize },

    #[error("rewrite cap of {cap} steps exceeded")]
    IterationCap { cap: usize },

    #[error("index sets differ: {0}")]
    IndexMismatch(String),

    #[error("weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
