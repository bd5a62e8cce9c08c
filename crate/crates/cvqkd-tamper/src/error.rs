use std::path::PathBuf;

/// Error type shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value is outside its documented range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation left the physical/numerical domain (unphysical
    /// covariance, negative symplectic eigenvalue beyond tolerance, ...).
    #[error("numerical domain error: {0}")]
    Numerical(String),

    /// Finite-size parameter estimation cannot produce usable worst-case
    /// bounds (block too small).
    #[error("estimation failure: {0}")]
    Estimation(String),

    /// The channel is fully blocked; moment-based estimators are undefined.
    #[error("blocked channel: {0}")]
    BlockedChannel(String),

    /// Configuration file problems (parse errors, missing sections).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 invalid configuration, 2 numerical
    /// domain failure, 3 i/o failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) => 1,
            Error::Numerical(_) | Error::Estimation(_) | Error::BlockedChannel(_) => 2,
            Error::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
