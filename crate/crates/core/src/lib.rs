//! Low-cost feature engineering and classifier benchmarking for social bot
//! detection.
//!
//! The pipeline: [`ingest`] labeled accounts, extract one of four
//! [`features`] sets, train one of five [`learners`], and [`eval`]uate with
//! stratified cross-validation. [`report`] wires it into experiment runs.

pub mod entropy;
pub mod eval;
pub mod exec;
pub mod features;
pub mod ingest;
pub mod learners;
pub mod report;

pub use exec::Execution;
pub use features::{FeatureMatrix, FeatureSchema, FeatureSet, FeatureVector};
pub use ingest::{AccountRecord, Label, LabeledDataset, TweetRecord};
pub use learners::{Algorithm, LearnerSpec, Model, Prediction};
