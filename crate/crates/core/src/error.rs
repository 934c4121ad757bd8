use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{field} = {value} is out of range: {expected}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("n = {n} too small: {reason}")]
    NTooSmall { n: usize, reason: String },

    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("sweep has only {got} usable n values, need at least {need}")]
    TooFewPoints { got: usize, need: usize },

    #[error("non-positive aggregated rate {rate} at n = {n}")]
    NonPositiveRate { n: usize, rate: f64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}
