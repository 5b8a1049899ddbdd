use thiserror::Error;

/// Errors produced by grid construction, potential engineering, the
/// stationary solver, the propagator and the fitting routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain too small: |psi| = {edge:.3e} at the boundary exceeds {limit:.1e}")]
    DomainTooSmall { edge: f64, limit: f64 },

    #[error("singular mapping: amplitude vanishes at interior grid point {index} (x = {x})")]
    SingularMapping { index: usize, x: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("numerical blow-up at t = {t} (step {step})")]
    BlowUp { t: f64, step: u64 },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit did not converge: {message}")]
    Fit { message: String, last: Vec<f64> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
