use thiserror::Error;

/// Errors produced by the solver, integrators and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Bethe equations did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate quasimomenta: {0}")]
    DegenerateState(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("no interior maximum inside bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
