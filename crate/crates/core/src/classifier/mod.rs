//! Per-(sensor, label) linear classifiers: standardization, class-balanced
//! L2-regularized logistic regression, cost grid search and prediction.

use thiserror::Error;

use crate::sensor::Sensor;

pub mod grid;
pub mod logistic;
mod matrix;
pub mod model;
pub mod serialize;
pub mod standardize;

pub use grid::{select_cost, stratified_split, CostSelection, COST_GRID, FALLBACK_COST};
pub use logistic::{
    class_weights, minimize, sigmoid, train_linear, train_linear_with_report, ClassWeighting,
    LinearModel, LogisticObjective, SolverReport,
};
pub use matrix::Matrix;
pub use model::{
    decide, feature_row, fit_pipeline, train_sensor_model, train_single_sensor, training_matrix,
    CostPolicy, FittedLinear, SensorModel, SingleSensorModel, TrainOptions,
};
pub use serialize::{model_from_str, model_to_string, read_model, write_model};
pub use standardize::Standardizer;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("degenerate label: training targets contain a single class")]
    DegenerateLabel,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cost must be positive and finite, got {0}")]
    InvalidCost(f64),
    #[error("at least 2 rows are needed to standardize, got {0}")]
    TooFewRows(usize),
    #[error("label {label}: {found} usable training examples")]
    NoTrainingExamples { label: String, found: usize },
    #[error("example lacks sensor {0}")]
    MissingSensor(Sensor),
    #[error("model expects sensors {expected:?}, got {got}")]
    SensorMismatch { expected: Vec<Sensor>, got: Sensor },
    #[error("model text line {line}: {message}")]
    Parse { line: usize, message: String },
}
