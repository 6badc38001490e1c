use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("moment order {0} is not supported (maximum is {max})", max = crate::distributions::MAX_MOMENT_ORDER)]
    UnsupportedOrder(usize),

    #[error("degenerate law: {0}")]
    DegenerateLaw(String),

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("law is not standardized (mean {mean}, variance {variance})")]
    NotStandardized { mean: f64, variance: f64 },

    #[error("{0} is not a prime >= 5")]
    NotPrime(u64),

    #[error("truncation at K = {k} keeps only mass {kept}, need at least 1 - 1e-12")]
    InsufficientTruncation { k: usize, kept: f64 },

    #[error("envelope is flat: {0}")]
    FlatEnvelope(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
