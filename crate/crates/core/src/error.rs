use thiserror::Error;

/// Failure categories shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate statistic: {0}")]
    DegenerateStatistic(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("degenerate observable: {0}")]
    DegenerateObservable(String),
    #[error("unsupported observable: {0}")]
    UnsupportedObservable(String),
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::DegenerateStatistic(_) => "degenerate-statistic",
            Error::UnsupportedModel(_) => "unsupported-model",
            Error::DegenerateObservable(_) => "degenerate-observable",
            Error::UnsupportedObservable(_) => "unsupported-observable",
            Error::DegenerateVariance(_) => "degenerate-variance",
            Error::UnsupportedSize(_) => "unsupported-size",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
