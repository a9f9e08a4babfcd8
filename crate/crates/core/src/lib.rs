//! Fake-news classification with per-token explanations.
//!
//! The numeric core is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below pin the double-precision types used by artifacts.

pub mod corpus;
pub mod dataset;
pub mod eval;
pub mod explain;
pub mod features;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod text;

pub use corpus::{Corpus, Label, NewsItem, Source};
pub use dataset::{build_configuration, ConfigName, DatasetConfiguration};
pub use explain::{explain, Explanation, Method};
pub use models::{ModelArtifact, ModelKind, TextClassifier};

pub type NaiveBayes = models::nb::NaiveBayes<f64>;
pub type LogisticRegression = models::logreg::LogisticRegression<f64>;
pub type TextCnn = models::cnn::TextCnn<f64>;
pub type Attribution = explain::Attribution<f64>;
pub type WeightedMetrics = eval::WeightedMetrics<f64>;
