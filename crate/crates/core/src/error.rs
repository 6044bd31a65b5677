use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hypergeometric series did not converge within {max_terms} terms (last partial sum {partial})")]
    NonConvergence { max_terms: usize, partial: f64 },

    #[error("lower parameter c = {0} is zero or a negative integer")]
    InvalidC(f64),

    #[error("b - a = {0} is an integer; the connection formula needs logarithmic terms")]
    DegenerateParameters(f64),

    #[error("argument z = {0} is outside the supported domain (z < 1)")]
    Domain(f64),

    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("adaptive quadrature exceeded depth {max_depth}: value {value}, error estimate {error_estimate}")]
    DepthExceeded {
        max_depth: usize,
        value: f64,
        error_estimate: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Wronskian vanished at u = {0}")]
    WronskianVanished(f64),

    #[error("f(R) underflowed after rescaling (f = {0:e}); boundary constant undefined")]
    BoundaryDegeneracy(f64),

    #[error("logarithm argument {0} is not positive")]
    NonPositiveArgument(f64),

    #[error("grid too coarse: trapezoid refinement disagreement {0:e}")]
    GridTooCoarse(f64),

    #[error("finite-difference system is singular (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("quadratic form is not positive definite (most negative pivot {0:e})")]
    IndefiniteForm(f64),

    #[error("profiles live on different grids")]
    GridMismatch,

    #[error("mollifier parameter r = {0} must be positive")]
    InvalidR(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
