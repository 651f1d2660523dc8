use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular P function: {0}")]
    SingularP(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("radial grid must start at 0 and be strictly increasing ({0})")]
    InvalidGrid(String),

    #[error("radius {radius} outside the estimate's grid [0, {max}]")]
    OutOfRange { radius: f64, max: f64 },

    #[error("characteristic function covers [0, {available}] but the filter needs [0, {required}]")]
    GridTooShort { required: f64, available: f64 },

    #[error("filter width {width} is too large: {reason}")]
    WidthTooLarge { width: f64, reason: String },

    #[error("negative variance {value:e} beyond clamp threshold {threshold:e}")]
    NegativeVariance { value: f64, threshold: f64 },

    #[error("all standard deviations in the profile are zero")]
    ZeroSigma,

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line frontend: 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::SingularP(_) => 2,
            Error::EmptyDataset
            | Error::InvalidGrid(_)
            | Error::Data { .. }
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => 3,
            Error::OutOfRange { .. }
            | Error::GridTooShort { .. }
            | Error::WidthTooLarge { .. }
            | Error::NegativeVariance { .. }
            | Error::ZeroSigma => 4,
        }
    }
}
