use std::path::PathBuf;

use stagate_core::Error as CoreError;
use thiserror::Error;

/// Everything the CLI can fail with, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config syntax error: {0}")]
    Syntax(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    Constraint { key: String, reason: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Write { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax(_) | CliError::UnknownKey(_) | CliError::Constraint { .. } => 2,
            CliError::Core(e) => match e {
                CoreError::InvalidParameter { .. }
                | CoreError::Resolution { .. }
                | CoreError::Grid { .. }
                | CoreError::CorrectionFlags
                | CoreError::InvalidAnharmonicity
                | CoreError::UnsupportedGate(_) => 2,
                _ => 3,
            },
            CliError::Io { .. } | CliError::Write { .. } => 4,
        }
    }

    /// Machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Syntax(_) => "syntax",
            CliError::UnknownKey(_) => "unknown_key",
            CliError::Constraint { .. } => "constraint",
            CliError::Core(_) if self.exit_code() == 2 => "constraint",
            CliError::Core(_) => "numerical",
            CliError::Io { .. } | CliError::Write { .. } => "io",
        }
    }
}
