use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (e.g. factoring zero).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A checked 64-bit computation overflowed.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported prime {0}: local densities are only available for p > 3")]
    UnsupportedPrime(String),

    #[error("unsupported modulus: {0}")]
    UnsupportedModulus(String),

    #[error("local density vanishes at p = {prime}: {detail}")]
    ZeroDensity { prime: String, detail: String },

    /// Two evaluations that must agree for any genuine cubic discriminant did not.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn overflow(what: &str) -> Self {
        Error::Overflow(what.to_string())
    }
}
