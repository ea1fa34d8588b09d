use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] lcmanifold_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} verification check(s) failed")]
    Verification(usize),
}

impl CliError {
    /// 0 success, 1 verification failure, 2 config validation, 3 singular
    /// algebra, 4 integration failure, 5 insufficient data.
    pub fn exit_code(&self) -> i32 {
        use lcmanifold_core::Error as E;
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::Domain(_) => 2,
                E::Singular { .. } | E::Pole { .. } | E::CrossCheck { .. } | E::NoBracket { .. } => 3,
                E::Integration { .. } => 4,
                E::InsufficientData(_) => 5,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
