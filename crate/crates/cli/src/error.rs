use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration, reported against the offending field.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Compute(#[from] pst_localisation::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.to_string().replace('\n', " "),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// The config field at fault, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Config { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io { .. } => 1,
        }
    }
}
