use std::path::PathBuf;

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure in {op}: {source}")]
    Numerical { op: &'static str, source: csc_core::Error },
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

/// Tags a core error with the operation that produced it.
pub trait During<T> {
    fn during(self, op: &'static str) -> Result<T, CliError>;
}

impl<T> During<T> for csc_core::Result<T> {
    fn during(self, op: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { op, source })
    }
}
