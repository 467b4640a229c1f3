use thiserror::Error;

/// Errors raised by the bound engines and their numerical building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("inconsistent density: integrates to {mass} (tolerance {tolerance})")]
    InconsistentDensity { mass: f64, tolerance: f64 },

    #[error("quadrature budget of {max_panels} panels exhausted (error estimate {error_estimate:e})")]
    QuadratureBudget {
        max_panels: usize,
        error_estimate: f64,
    },

    #[error("expected {expected} users, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("{users} users exceeds the enumeration limit of {limit}")]
    Size { users: usize, limit: usize },

    #[error("capacity solver stopped after {iterations} iterations with bracket {bracket:e}")]
    Budget { iterations: usize, bracket: f64 },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("invalid region: {0}")]
    Region(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
