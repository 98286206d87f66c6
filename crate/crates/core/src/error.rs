use thiserror::Error;

/// Errors raised by the operator-algebra and instrument routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has {len} entries, expected {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("zero vector")]
    ZeroVector,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("center is not abelian (residual {0:e})")]
    NonAbelianCenter(f64),

    #[error("spectral projection residual {residual:e} exceeds tolerance {tol:e}")]
    NotProjection { residual: f64, tol: f64 },

    #[error("state invariance violated: |phi_b(gamma(x)) - phi_a(x)| = {0:e}")]
    InvarianceViolated(f64),

    #[error("intertwining residual {0:e} exceeds tolerance")]
    IntertwiningFailed(f64),

    #[error("no unitary solves the subalgebra matching problem (residual {0:e})")]
    NoMatchingUnitary(f64),

    #[error("level {level} out of range (path covers levels up to {max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("vector does not lie in the range of projection {index} (residual {residual:e})")]
    NotInRange { index: usize, residual: f64 },

    #[error("choi matrix of outcome {outcome} fails the PSD tolerance: min eigenvalue {min_eigenvalue:e} < -{tol:e}")]
    ChoiNotPsd { outcome: usize, min_eigenvalue: f64, tol: f64 },

    #[error("outcome sets do not match: {0}")]
    OutcomeMismatch(String),

    #[error("partition cells overlap at eigenvalue {0}")]
    OverlappingCells(f64),

    #[error("eigenvalue {0} is not covered by any partition cell")]
    UncoveredEigenvalue(f64),

    #[error("ambient dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
