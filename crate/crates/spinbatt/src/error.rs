use std::io;
use std::path::PathBuf;

use spinbatt_core::ErrorKind;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] spinbatt_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    /// Process exit status: 2 usage, 3 capacity, 4 numerical regime, 1 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Core(e) => match e.kind() {
                ErrorKind::InvalidInput => 2,
                ErrorKind::Capacity => 3,
                ErrorKind::Regime => 4,
            },
            HarnessError::Io { .. } | HarnessError::Pool(_) => 1,
        }
    }
}
