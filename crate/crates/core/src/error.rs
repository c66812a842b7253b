use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
    #[error("index {index} out of range (bound {bound})")]
    Index { index: usize, bound: usize },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("polynomial of length {len} does not fit blocklength {n}")]
    PolynomialTooLong { len: usize, n: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("enumeration over n = {n} exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },
    #[error("invalid code spec: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
