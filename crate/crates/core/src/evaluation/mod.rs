//! Subject-partitioned evaluation: folds, metrics from summed counts, the
//! coin-flip baseline, confusion matrices and result tables.

use thiserror::Error;

use crate::classifier::ClassifierError;
use crate::fusion::FusionError;

pub mod baseline;
pub mod confusion;
pub mod cv;
pub mod folds;
pub mod metrics;
pub mod report;

pub use baseline::{random_baseline_p99, random_baseline_p99_average, BaselineP99};
pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use cv::{cross_validate, CostRecord, CvOptions, CvResult, LabelResult, System, SystemResult};
pub use folds::{partition_folds, FoldPartition};
pub use metrics::{average_reports, compute_metrics, AverageReport, Metric, MetricCounts, MetricReport};
pub use report::Table;

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("partition has no folds")]
    EmptyPartition,
    #[error("user {user} appears in fold {first} and fold {second}")]
    UserInTwoFolds { user: String, first: usize, second: usize },
    #[error("{users} users cannot fill {folds} folds")]
    TooFewUsers { users: usize, folds: usize },
    #[error("user {0} is not in any fold")]
    UserNotInPartition(String),
    #[error("{truth} truth values but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("class index {0} out of range")]
    ClassIndex(usize),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}
