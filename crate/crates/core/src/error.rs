use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument {0} is too close to a pole")]
    Pole(String),
    #[error("character is not primitive (modulus {modulus}, conductor {conductor})")]
    NotPrimitive { modulus: u64, conductor: u64 },
    #[error("character is odd; only even characters are supported here")]
    OddCharacter,
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("truncation limit {limit} is insufficient: tail estimate {tail:e}")]
    InsufficientLimit { limit: u64, tail: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
