use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A trial (or a decode request) cannot reach its recovery threshold.
    #[error("unrecoverable: {detail}")]
    Unrecoverable {
        /// 1-based set index that fell short, when the failure is per set.
        set: Option<usize>,
        detail: String,
    },

    #[error("no data to plot")]
    NoData,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn unrecoverable(set: Option<usize>, detail: impl Into<String>) -> Self {
        Error::Unrecoverable {
            set,
            detail: detail.into(),
        }
    }
}
