use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("requested enumeration size {requested} exceeds the cap {cap}")]
    SizeLimit { requested: usize, cap: usize },

    #[error("depth {depth} is smaller than the partition length {length}")]
    Truncation { depth: usize, length: usize },

    #[error("{0} is not a half-integer (doubled value must be odd)")]
    NotHalfInteger(i64),

    #[error("series order {requested} exceeds the cap {cap}")]
    OrderLimit { requested: usize, cap: usize },

    #[error("Miwa shift of modulus {modulus} is outside the admissible disc (|z| < {max})")]
    Domain { modulus: f64, max: f64 },

    #[error("invalid sigma weight: {0}")]
    InvalidSigma(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
