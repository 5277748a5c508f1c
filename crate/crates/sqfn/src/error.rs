use std::path::PathBuf;

/// Everything that can stop a run, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] sqfn_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// 1 for bad requests and violated hypotheses, 2 for anything touching files.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Domain(_) => 1,
            CliError::Io { .. }
            | CliError::Format { .. }
            | CliError::Csv(_)
            | CliError::Json(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Domain(sqfn_core::Error::Precondition(_)) => "precondition",
            CliError::Domain(_) => "domain",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Csv(_) => "csv",
            CliError::Json(_) => "json",
        }
    }

    /// The one-line record written to standard error.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
