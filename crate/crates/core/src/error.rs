use thiserror::Error;

/// Errors raised by the quadrature library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("Hermite degree {degree} exceeds the supported maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("{what} = {value} is outside the supported range {min}..={max}")]
    InvalidSize {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range for a rule exact up to {limit}")]
    Index { index: usize, limit: usize },

    #[error(
        "tridiagonal eigensolver did not converge for eigenvalue {eigenvalue} after {sweeps} sweeps"
    )]
    NoConvergence { eigenvalue: usize, sweeps: usize },

    #[error(
        "kernel matrix is numerically not positive definite (condition estimate {condition:.3e})"
    )]
    IllConditioned { condition: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("integrand returned non-finite value {value} at multi-index {index:?}")]
    NonFiniteIntegrand { index: Vec<usize>, value: f64 },
}

impl Error {
    /// True for failures that come from floating-point breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::IllConditioned { .. }
                | Error::Numerical(_)
                | Error::NonFiniteIntegrand { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
