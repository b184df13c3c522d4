use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A weighted quantity left the representable double range.
    #[error("value at index {index} is outside double range (log magnitude {log_magnitude:.3})")]
    Range { index: usize, log_magnitude: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge: error estimate {estimate:.3e} > tolerance {tolerance:.3e} \
         after {refinements} refinements"
    )]
    Convergence {
        estimate: f64,
        tolerance: f64,
        refinements: usize,
    },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
