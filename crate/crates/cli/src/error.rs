use ctxrec_core::evaluation::EvaluationError;
use ctxrec_core::ingest::IngestError;
use ctxrec_core::personalization::PersonalizationError;
use thiserror::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input data.
    #[error("{0}")]
    Input(String),
    /// Inconsistent configuration: unknown labels, users or systems.
    #[error("{0}")]
    Config(String),
    /// A broken internal invariant, including a failed reproduction.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Partition(p) => p.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<EvaluationError> for CliError {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::EmptyPartition
            | EvaluationError::UserInTwoFolds { .. }
            | EvaluationError::TooFewUsers { .. }
            | EvaluationError::UserNotInPartition(_)
            | EvaluationError::UnknownSystem(_) => CliError::Config(e.to_string()),
            e => CliError::Internal(e.to_string()),
        }
    }
}

impl From<PersonalizationError> for CliError {
    fn from(e: PersonalizationError) -> Self {
        match e {
            PersonalizationError::UnknownUser(_) | PersonalizationError::TooFewExamples { .. } => {
                CliError::Config(e.to_string())
            }
            e => CliError::Internal(e.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}
