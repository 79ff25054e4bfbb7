//! Small trainable models used by the resamplers and the benchmark harness.

pub mod kmeans;
pub mod knn;
pub mod linear;
pub mod selection;

pub use kmeans::{kmeans_fit, KMeansModel};
pub use knn::knn_score;
pub use linear::{logistic_fit, svm_fit, LinearScorer, Loss, SvmFit, SUPPORT_MARGIN_EPS};
pub use selection::{default_candidates, select_model_cv, ClassifierConfig, FittedScorer, Selection};
