//! Per-token Shapley attributions toward the Fake class.

pub mod game;
pub mod linalg;
pub mod shapley;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::models::{ArtifactError, ModelArtifact, TextClassifier};
use crate::text::analyze;

pub use game::{coalition_value, CoalitionGame, FnGame, Masking, TextGame};
pub use shapley::{
    kernel_exhaustive, kernel_weight, shapley_exact, shapley_kernel, shapley_permutation,
    Attribution, MAX_EXACT_PLAYERS,
};

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("text is empty after normalization")]
    EmptyText,
    #[error("{players} players exceed the exact limit of {limit}; use the kernel or permutation estimator")]
    TooManyPlayers { players: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("kernel system is singular even after regularization")]
    Singular,
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Kernel,
    Permutation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Kernel => "kernel",
            Method::Permutation => "permutation",
        }
    }
}

/// One token with its attribution. Offsets are byte offsets into the
/// normalized text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenForce {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub force: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
}

/// Wire form of an explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub base_value: f64,
    pub p_fake: f64,
    pub label: Label,
    pub method: Method,
    pub samples_used: usize,
    pub tokens: Vec<TokenForce>,
    /// The normalized text the token offsets refer to.
    pub normalized_text: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub regularized: bool,
}

impl Explanation {
    pub fn efficiency_residual(&self) -> f64 {
        (self.base_value + self.tokens.iter().map(|t| t.force).sum::<f64>() - self.p_fake).abs()
    }
}

/// Which estimator `explain_with` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Exact up to the guard, kernel above it.
    #[default]
    Auto,
    Exact,
    Kernel,
    Permutation,
}

#[derive(Debug, Clone, Copy)]
pub struct ExplainOptions {
    pub budget: usize,
    pub seed: u64,
    pub masking: Masking,
    pub strategy: Strategy,
}

impl ExplainOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        ExplainOptions {
            budget,
            seed,
            masking: Masking::Remove,
            strategy: Strategy::Auto,
        }
    }
}

/// Kernel sample count for `n` tokens under `budget`: `min(budget, 4n + 2048)`,
/// raised to the `2n` floor the estimator requires.
pub fn kernel_samples(n: usize, budget: usize) -> usize {
    budget.min(4 * n + 2048).max(2 * n)
}

/// Explain `text` with the default options.
pub fn explain<C: TextClassifier + ?Sized>(
    model: &C,
    text: &str,
    budget: usize,
    seed: u64,
) -> Result<Explanation, ExplainError> {
    explain_with(model, text, &ExplainOptions::new(budget, seed))
}

pub fn explain_with<C: TextClassifier + ?Sized>(
    model: &C,
    text: &str,
    opts: &ExplainOptions,
) -> Result<Explanation, ExplainError> {
    let (normalized, tokens) = analyze(text);
    if tokens.is_empty() {
        return Err(ExplainError::EmptyText);
    }
    let game = TextGame::new(model, &tokens, opts.masking);
    let n = tokens.len();
    let attr = match opts.strategy {
        Strategy::Auto if n <= MAX_EXACT_PLAYERS => shapley_exact(&game)?,
        Strategy::Exact => shapley_exact(&game)?,
        Strategy::Auto | Strategy::Kernel => {
            if n < 2 {
                shapley_exact(&game)?
            } else {
                shapley_kernel(&game, kernel_samples(n, opts.budget), opts.seed)?
            }
        }
        Strategy::Permutation => shapley_permutation(&game, opts.budget.max(1), opts.seed)?,
    };
    let se = attr.standard_error.clone();
    let tokens = tokens
        .into_iter()
        .enumerate()
        .map(|(i, t)| TokenForce {
            surface: t.surface,
            start: t.start,
            end: t.end,
            force: attr.phi[i],
            standard_error: se.as_ref().map(|s| s[i]),
        })
        .collect();
    Ok(Explanation {
        base_value: attr.base_value,
        p_fake: attr.full_value,
        label: Label::from_probability(attr.full_value),
        method: attr.method,
        samples_used: attr.samples_used,
        tokens,
        normalized_text: normalized,
        regularized: attr.regularized,
    })
}

/// Load the model held by `artifact` and explain `text`.
pub fn explain_artifact(
    artifact: &ModelArtifact,
    text: &str,
    budget: usize,
    seed: u64,
) -> Result<Explanation, ExplainError> {
    let model = artifact.load_model()?;
    explain(&model, text, budget, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts occurrences of "fake" tokens; a crude bag-of-words model.
    struct Counter;

    impl TextClassifier for Counter {
        fn model_id(&self) -> &str {
            "counter"
        }

        fn predict_terms(&self, terms: &[Option<&str>]) -> f64 {
            let hits = terms.iter().flatten().filter(|t| **t == "hoax").count() as f64;
            let other = terms.iter().flatten().filter(|t| **t != "hoax").count() as f64;
            crate::scalar::sigmoid(0.8 * hits - 0.1 * other)
        }
    }

    #[test]
    fn dispatch_by_length() {
        let e = explain(&Counter, "a hoax here", 5000, 1).unwrap();
        assert_eq!(e.method, Method::Exact);
        assert_eq!(e.samples_used, 8);
        assert!(e.efficiency_residual() < 1e-9);

        let long: Vec<String> = (0..40)
            .map(|i| {
                if i % 7 == 0 {
                    "hoax".into()
                } else {
                    format!("w{i}")
                }
            })
            .collect();
        let e = explain(&Counter, &long.join(" "), 5000, 1).unwrap();
        assert_eq!(e.method, Method::Kernel);
        assert!(e.samples_used <= 5000);
        assert_eq!(e.tokens.len(), 40);
        assert!(e.efficiency_residual() < 1e-9);
    }

    #[test]
    fn empty_text_rejected() {
        assert!(matches!(
            explain(&Counter, "  \t ", 100, 0),
            Err(ExplainError::EmptyText)
        ));
    }

    #[test]
    fn duplicate_surfaces_are_symmetric() {
        let e = explain(&Counter, "hoax claim hoax", 100, 0).unwrap();
        assert!((e.tokens[0].force - e.tokens[2].force).abs() < 1e-9);
        assert!(e.tokens[0].force > 0.0 && e.tokens[1].force < 0.0);
    }

    #[test]
    fn offsets_point_into_normalized_text() {
        let e = explain(&Counter, "Big HOAX at https://x.io/a", 100, 0).unwrap();
        for t in &e.tokens {
            assert_eq!(&e.normalized_text[t.start..t.end], t.surface);
        }
    }

    #[test]
    fn json_shape() {
        let e = explain(&Counter, "hoax", 100, 0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&e).unwrap();
        for k in [
            "base_value",
            "p_fake",
            "label",
            "method",
            "samples_used",
            "tokens",
        ] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["method"], "exact");
        assert!(v.get("regularized").is_none());
    }

    #[test]
    fn kernel_sample_floor() {
        assert_eq!(kernel_samples(40, 5000), 2208);
        assert_eq!(kernel_samples(40, 10), 80);
    }
}
