use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("potential is not one-cut in the search window: {0}")]
    NotOneCut(String),
    #[error("equilibrium measure is not regular: {0}")]
    NotRegular(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("resolvent is singular: {0}")]
    SingularResolvent(String),
    #[error("budget exceeded after partial value {partial} (error estimate {estimate}): {reason}")]
    BudgetExceeded {
        partial: f64,
        estimate: f64,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
