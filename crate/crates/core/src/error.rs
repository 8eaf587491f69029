use thiserror::Error;

/// Errors raised by the linear-algebra kernel, state constructors, channels,
/// metric routines and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not traceless (trace = {0:e})")]
    NotTraceless(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("weights sum to {0}, expected 1")]
    WeightMismatch(f64),

    #[error("invalid weight {0}")]
    InvalidWeight(f64),

    #[error("mixing matrix is not an isometry (max |V^dag V - I| = {0:e})")]
    NotIsometry(f64),

    #[error("degenerate generator spectrum (gap {0:e})")]
    DegenerateSpectrum(f64),

    #[error("channel is not trace preserving (trace deviation {0:e})")]
    CptpViolation(f64),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("finite-difference step {0:e} is below 1e-12")]
    StepTooSmall(f64),

    #[error("finite-difference step {0:e} outside [1e-6, 1e-2]")]
    StepOutOfRange(f64),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
