use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter block violates one of its invariants.
    #[error("invalid {block}: {message}")]
    Invalid { block: &'static str, message: String },

    /// Malformed configuration or data file.
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },

    /// The time integration produced an inadmissible state.
    #[error("numerical failure at t = {t:.6} h: {message}")]
    Numerical { t: f64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(block: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            block,
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 2,
            _ => 1,
        }
    }
}
