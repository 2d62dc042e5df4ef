use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{a} is not invertible modulo {q} (gcd = {gcd})")]
    NotInvertible { a: u64, q: u64, gcd: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} = {got} out of range (limit {limit})")]
    Range { what: &'static str, got: u64, limit: u64 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numerical failure: {what} (achieved {achieved:e}, wanted {wanted:e})")]
    Numerical { what: &'static str, achieved: f64, wanted: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
