use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const INTERNAL: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const BUDGET: i32 = 3;
    pub const IO: i32 = 4;
    pub const CROSSCHECK: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] brqw::Error),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("crosscheck failed: {failed} of {total} cells have |z| > {threshold}")]
    Crosscheck { failed: usize, total: usize, threshold: f64 },
}

impl CliError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use brqw::Error as E;
        match self {
            CliError::Library(e) => match e {
                E::BudgetExceeded { .. } => exit::BUDGET,
                E::Io { .. } => exit::IO,
                E::InvariantViolated(_) | E::RootFinding(_) => exit::INTERNAL,
                _ => exit::VALIDATION,
            },
            CliError::Validation { .. } => exit::VALIDATION,
            CliError::Io { .. } | CliError::Csv(_) => exit::IO,
            CliError::Json(_) => exit::INTERNAL,
            CliError::Crosscheck { .. } => exit::CROSSCHECK,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
