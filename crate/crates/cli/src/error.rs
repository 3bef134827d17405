use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ConfigInvalid: `{key}`: {message}")]
    ConfigInvalid { key: String, message: String },
    #[error("{message}")]
    Engine { name: &'static str, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    BadLine { path: PathBuf, line: usize, message: String },
    #[error("validation failed for {failed} of {total} lines")]
    ValidationFailed { failed: usize, total: usize },
    #[error("{0}")]
    Generation(String),
    #[error(transparent)]
    Harness(#[from] tabexec_harness::HarnessError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.into(), message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } | CliError::Usage(_) => 2,
            CliError::Engine { .. } => 3,
            CliError::ValidationFailed { .. } => 4,
            CliError::Harness(_) => 5,
            _ => 1,
        }
    }
}

impl From<tabexec_core::GenError> for CliError {
    fn from(e: tabexec_core::GenError) -> Self {
        use tabexec_core::GenError;
        match e {
            GenError::ConfigInvalid { field, message } => CliError::ConfigInvalid { key: field, message },
            GenError::Table(tabexec_core::TableError::ConfigInvalid { field, message }) => {
                CliError::ConfigInvalid { key: field, message }
            }
            GenError::AtIndex { source, index } => match CliError::from(*source) {
                c @ CliError::ConfigInvalid { .. } => c,
                other => CliError::Generation(format!("example {index}: {other}")),
            },
            other => CliError::Generation(other.to_string()),
        }
    }
}

impl From<tabexec_harness::ReportError> for CliError {
    fn from(e: tabexec_harness::ReportError) -> Self {
        CliError::Analysis(e.to_string())
    }
}

impl From<tabexec_harness::StatsError> for CliError {
    fn from(e: tabexec_harness::StatsError) -> Self {
        CliError::Analysis(e.to_string())
    }
}

impl From<tabexec_core::TableError> for CliError {
    fn from(e: tabexec_core::TableError) -> Self {
        CliError::from(tabexec_core::GenError::Table(e))
    }
}

impl From<tabexec_core::sql::SqlError> for CliError {
    fn from(e: tabexec_core::sql::SqlError) -> Self {
        CliError::Engine { name: e.name(), message: e.to_string() }
    }
}

impl From<tabexec_core::render::RenderError> for CliError {
    fn from(e: tabexec_core::render::RenderError) -> Self {
        match e {
            tabexec_core::render::RenderError::Sql(s) => s.into(),
            tabexec_core::render::RenderError::Table(t) => t.into(),
            other => CliError::Generation(other.to_string()),
        }
    }
}
