//! Reading and writing datasets, fold partitions and raw session bundles.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::evaluation::EvaluationError;
use crate::features::FeatureError;
use crate::sensor::{Sensor, SensorError};

pub mod features_csv;
pub mod partition;
pub mod session;

pub use features_csv::{
    dataset_from_tables, list_feature_files, parse_features_csv, read_features_dir, read_features_file,
    user_id_from_path, write_features_csv, write_features_file, FeatureTable,
};
pub use partition::{load_fold_directory, load_fold_partition, save_fold_partition};
pub use session::{
    find_sessions, read_session_bundle, session_to_example, write_session_bundle, SessionBundle, SessionMeta,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("line {line}: expected {expected} fields, found {got}")]
    Ragged { line: usize, expected: usize, got: usize },
    #[error("line {line}: timestamp {timestamp} already used on line {first_line}")]
    DuplicateTimestamp { line: usize, first_line: usize, timestamp: i64 },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("{sensor} has {got} feature columns, expected {expected}")]
    GroupWidth { sensor: Sensor, expected: usize, got: usize },
    #[error("line {line}, column `{column}`: cannot parse `{value}`")]
    InvalidCell { line: usize, column: String, value: String },
    #[error("line {line}, column `{column}`: label value `{value}` is not 0, 1 or empty")]
    InvalidLabel { line: usize, column: String, value: String },
    #[error("first column must be `timestamp`")]
    MissingTimestampColumn,
    #[error("{}: {message}", path.display())]
    Session { path: PathBuf, message: String },
    #[error("{file}, line {line}: timestamps must be strictly increasing")]
    NonMonotone { file: String, line: usize },
    #[error("no input files in {}", .0.display())]
    NoInput(PathBuf),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<IngestError>,
    },
    #[error(transparent)]
    Partition(#[from] EvaluationError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

impl IngestError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub(crate) fn from_csv(e: csv::Error) -> Self {
        IngestError::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        }
    }

    /// Attaches a file path to errors that only carry a line number.
    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (IngestError::Io { .. } | IngestError::Session { .. } | IngestError::InFile { .. }) => e,
            e => IngestError::InFile {
                path: path.to_path_buf(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, without file context.
    pub fn root(&self) -> &IngestError {
        match self {
            IngestError::InFile { source, .. } => source.root(),
            e => e,
        }
    }
}
