use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("arithmetic overflow in exact rational computation")]
    Overflow,

    #[error("empty epsilon window: lower {lower} >= upper {upper}")]
    EmptyWindow { lower: String, upper: String },

    #[error("parameters outside the admissible range: {0}")]
    OutsideRange(String),

    #[error("postcondition violated: {0}")]
    Postcondition(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value produced: {0}")]
    NonFinite(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("Picard iteration diverged (gaps {gaps:?})")]
    Diverged { gaps: Vec<f64> },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
