//! Resampling methods for imbalanced binary classification and the harness
//! that benchmarks them.

pub mod benchmark;
pub mod dataset;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod neighbors;
pub mod oversampling;
pub mod report;
pub mod resample;
pub mod rng;
pub mod undersampling;

pub use dataset::{Class, LabeledDataset};
pub use error::{Error, Result};
pub use metrics::{Metric, MetricScores, ScoredPredictions};
pub use resample::Resampled;
