use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("resource guard: {vertices} vertices exceeds limit {limit}")]
    GuardExceeded { vertices: u64, limit: u64 },

    #[error("result too large: estimated {estimated_bits} bits exceeds max {max_bits}")]
    TooLarge { estimated_bits: u64, max_bits: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("subspaces live in different ambient spaces")]
    MismatchedAmbient,

    #[error("invalid basis triple (i={i}, j={j}, t={t}) for n={n}")]
    InvalidTriple {
        n: usize,
        i: usize,
        j: usize,
        t: usize,
    },

    #[error("orbit inconsistency: product entries for intersection dimension {s} take values {first} and {second}")]
    OrbitInconsistency { s: usize, first: i64, second: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::OutOfRange {
            what,
            detail: detail.into(),
        }
    }
}
