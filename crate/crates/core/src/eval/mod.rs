//! Evaluation: confusion matrices, weighted metrics, reports and term clouds.

pub mod cloud;
pub mod metrics;
pub mod report;

use thiserror::Error;

pub use cloud::{default_stopwords, term_cloud, TermFrequencyCloud};
pub use metrics::{
    confusion, rounded_percentages, weighted_metrics, ClassMetrics, ConfusionMatrix,
    WeightedMetrics,
};
pub use report::{evaluate, evaluate_classifier, EvaluationReport};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{predicted} predictions for {truth} labels")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error(transparent)]
    Artifact(#[from] crate::models::ArtifactError),
}
