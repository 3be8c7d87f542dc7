use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("bracket too small: objective still increasing at x = {0}")]
    BracketTooSmall(f64),
    #[error("no selection exceeds {threshold}: supremum is {sup}")]
    NotAttainable { sup: f64, threshold: f64 },
    #[error("vector lies outside the restricted domain")]
    DomainViolation,
    #[error("at j = {j}, k = {k}: {source}")]
    AtIndex {
        j: usize,
        k: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
