use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("operator is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("expectation value has imaginary part {0:.3e}")]
    ImaginaryExpectation(f64),

    #[error("negative variance {0:.3e} beyond clamping tolerance")]
    NegativeVariance(f64),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("two_j = {two_j} exceeds the {method} cap of {cap}")]
    CapabilityExceeded {
        method: &'static str,
        two_j: u32,
        cap: u32,
    },

    #[error("truncation unsafe: discarded weight {weight:.3e} above tolerance {tolerance:.1e}")]
    TruncationUnsafe { weight: f64, tolerance: f64 },

    #[error("state outside the required regime: {0}")]
    RegimeViolation(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("empty wavefunction")]
    EmptyWaveFunction,
}

pub type Result<T> = std::result::Result<T, Error>;
