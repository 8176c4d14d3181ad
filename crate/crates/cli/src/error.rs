use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: swe_afc::Error,
    },
}

impl CliError {
    pub fn config(field: &str, message: impl ToString) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn solver(context: impl Into<String>, source: swe_afc::Error) -> Self {
        match source {
            swe_afc::Error::Config(m) => CliError::Config {
                field: context.into(),
                message: m,
            },
            source => CliError::Solver {
                context: context.into(),
                source,
            },
        }
    }

    /// Process exit code: 2 for configuration errors, 3 for I/O failures,
    /// 4 for failures during the computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Solver { .. } => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Solver { .. } => "runtime",
        }
    }
}
