//! Context recognition from smartphone and smartwatch sensors.
//!
//! The pipeline extracts fixed-dimension feature vectors per sensor, trains
//! one class-balanced logistic regression per (sensor, label) pair, combines
//! sensors with early fusion, probability averaging or a learned second layer,
//! and evaluates everything with subject-partitioned cross-validation.

pub mod classifier;
pub mod cleaning;
pub mod evaluation;
pub mod features;
pub mod fusion;
pub mod geo;
pub mod ingest;
pub mod labels;
pub mod personalization;
pub mod sensor;
pub mod stats;
pub mod synthetic;

pub use sensor::{
    validate_example, Dataset, Example, ExampleId, FeatureVector, LabelAssignment, LabelValue,
    Platform, Sensor, EARLY_FUSION_DIM,
};
