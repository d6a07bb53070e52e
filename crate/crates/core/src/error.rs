use thiserror::Error;

/// Errors raised by the state-space constructions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero vector is not a state (norm {0:e})")]
    ZeroVector(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid classical state: {0}")]
    InvalidClassicalState(String),

    #[error("dimension {0} is not a perfect square")]
    NotSquareDim(usize),

    #[error("real dimension {0} is odd")]
    OddDimension(usize),

    #[error("time step must be positive (got {0})")]
    NonpositiveStep(f64),

    #[error("step budget exceeded: {0} steps requested, at most 1e7 allowed")]
    StepBudgetExceeded(f64),

    #[error("tangent vectors are attached to different base points")]
    BasePointMismatch,

    #[error("curve too coarse: overlap {overlap:.6} between samples {index} and {next}", next = index + 1)]
    TooCoarse { index: usize, overlap: f64 },

    #[error("parameter {index} = {value} lies outside the chart domain")]
    OutOfDomain { index: usize, value: f64 },

    #[error("induced metric is singular at a quadrature node (det {0:e})")]
    SingularMetric(f64),

    #[error("perturbed chart is no longer an immersion (det {0:e})")]
    ImmersionLost(f64),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed ({invariant}): {detail}")]
    Validation {
        invariant: &'static str,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
