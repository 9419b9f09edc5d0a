use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: pq_sap::Error,
    },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// 2 for bad invocations, 1 for everything that went wrong afterwards.
    pub fn exit_code(&self) -> i32 {
        use pq_sap::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core { source, .. } => match source {
                E::UnknownParamSet(_) | E::ViewTagWidth(_) | E::CursorOutOfRange { .. } => 2,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Verification(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for pq_sap::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: what(), source })
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}
