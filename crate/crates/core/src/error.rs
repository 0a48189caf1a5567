use thiserror::Error;

/// Errors raised by the library.
///
/// Decoding outcomes (failure, ambiguity) are returned as values, not as
/// variants of this type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime below 65536")]
    InvalidModulus(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("code has dimension zero")]
    ZeroCode,
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
