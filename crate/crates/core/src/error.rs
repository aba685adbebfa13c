use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("quadrature did not converge on [{a}, {b}]: estimate {value:e}, error {abs_err:e}, {intervals} intervals")]
    Quadrature {
        a: f64,
        b: f64,
        value: f64,
        abs_err: f64,
        intervals: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
