use thiserror::Error;

/// Errors raised by the geometry kernel, game evaluators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix is not positive definite (eigenvalue {eigenvalue:e} at or below floor)")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("tangent vector is not based at the given point")]
    BasePointMismatch,

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    #[error("negative distance {0}")]
    NegativeDistance(f64),

    #[error("loss or gradient evaluation failed: {0}")]
    EvaluationFailure(String),

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("sample pair closer than the minimum separation after {attempts} attempts")]
    DegenerateSample { attempts: usize },

    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),

    #[error("gamma must exceed 1, got {0}")]
    InvalidGamma(f64),

    #[error("coupling {0} not supported (|lambda| < 1 on Euclidean factors, 0 otherwise)")]
    CouplingTooLarge(f64),

    #[error("step size {eta} at iteration {k} exceeds 2 mu / L^2 = {bound}")]
    StepSizeTooLarge { k: usize, eta: f64, bound: f64 },

    #[error("non-finite value encountered at iteration {0}")]
    NumericalFailure(usize),

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("point lies outside the constraint set (coordinate {index})")]
    PointOutsideSet { index: usize },

    #[error("gradient unavailable for constraint {0}")]
    GradientUnavailable(usize),

    #[error("operator is not monotone on the sample (min quotient {0:e})")]
    NonMonotone(f64),

    #[error("trace stride {0} is too coarse for auditing (need 1)")]
    StrideTooCoarse(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
