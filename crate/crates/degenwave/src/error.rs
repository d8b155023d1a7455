use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid flux model: {0}")]
    InvalidFlux(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("out of convex branch: {0}")]
    OutOfBranch(String),

    /// Adaptive quadrature hit the depth cap; carries the best estimate
    /// and a conservative error bound so callers can still inspect it.
    #[error("quadrature did not converge: best estimate {value} (error bound {bound})")]
    NoConvergence { value: f64, bound: f64 },

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("unsupported multiwave case: {0}")]
    CaseUnsupported(String),

    #[error("invalid norm order q = {0}")]
    InvalidQ(f64),

    #[error("insufficient data: {got} samples in window, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("rate fit requires strictly positive values (found {0})")]
    NonPositiveValues(f64),

    #[error("interpolation ratio undefined for identically zero field")]
    DivisionByZero,

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("numerical instability at t = {t} (step {step}): {reason}")]
    Instability { t: f64, step: u64, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
