use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} must be finite")]
    NonFinite(&'static str),

    #[error("interval {interval} is transformed on the grid but has zero linewidth; use stick mode")]
    ZeroLinewidth { interval: usize },

    #[error("interval {interval} has linewidth {gamma} fs^-1; stick spectra need undamped intervals")]
    NonzeroLinewidth { interval: usize, gamma: f64 },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("no peak within {tolerance} rad/fs of ({x}, {y})")]
    PeakNotFound { x: f64, y: f64, tolerance: f64 },

    #[error("oracle routes disagree: max relative deviation {deviation:e} exceeds {tolerance:e}")]
    OracleMismatch { deviation: f64, tolerance: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for bad input, 3 for a broken numerical
    /// contract, 1 for I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::ZeroLinewidth { .. }
            | Error::NonzeroLinewidth { .. }
            | Error::PeakNotFound { .. } => 2,
            Error::NonFinite(_) | Error::GridMismatch(_) | Error::OracleMismatch { .. } => 3,
            Error::Write { .. } | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
