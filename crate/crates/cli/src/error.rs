use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Model(#[source] lambda_relax::Error),

    /// A sweep point failed; `point` names the parameters.
    #[error("at {point}: {source}")]
    Point {
        point: String,
        #[source]
        source: lambda_relax::Error,
    },

    #[error("cannot read config {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),

    #[error("{failed} acceptance criteria failed")]
    Acceptance { failed: usize },
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for numerical or acceptance
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } | CliError::Serialize(_) => 1,
            CliError::Model(e) | CliError::Point { source: e, .. } => model_exit_code(e),
            CliError::Acceptance { .. } => 2,
        }
    }
}

fn model_exit_code(e: &lambda_relax::Error) -> i32 {
    use lambda_relax::Error::*;
    match e {
        Config(_) | Ket { .. } | IndexOutOfRange { .. } | Bipartition(_) | UnknownCase(_) => 1,
        Dimension { .. } | InvalidState(_) | Numerical(_) => 2,
    }
}

impl From<lambda_relax::Error> for CliError {
    fn from(e: lambda_relax::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}
