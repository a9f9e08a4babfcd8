//! Trainable text classifiers and their persisted form.

pub mod artifact;
pub mod cnn;
pub mod logreg;
pub mod nb;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::analyze;

pub use artifact::{
    load_artifact, save_artifact, ArtifactError, LoadedModel, ModelArtifact, Tensor, TrainingMeta,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training set for {0} needs both classes")]
    SingleClass(&'static str),
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("hyperparameter `{name}` = {value} outside {range}")]
    Hyperparameter {
        name: String,
        value: f64,
        range: &'static str,
    },
    #[error("model kind `{0}` is reserved and cannot be trained natively")]
    Unsupported(ModelKind),
    #[error("vocabulary has no terms")]
    EmptyVocabulary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nb,
    Logreg,
    Cnn,
    /// Reserved slot; never trained here.
    Bert,
    /// Reserved slot; never trained here.
    Bilstm,
}

impl ModelKind {
    pub const NATIVE: [ModelKind; 3] = [ModelKind::Nb, ModelKind::Logreg, ModelKind::Cnn];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Nb => "nb",
            ModelKind::Logreg => "logreg",
            ModelKind::Cnn => "cnn",
            ModelKind::Bert => "bert",
            ModelKind::Bilstm => "bilstm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nb" | "naive_bayes" | "naivebayes" => Ok(ModelKind::Nb),
            "logreg" | "lr" | "logistic" => Ok(ModelKind::Logreg),
            "cnn" => Ok(ModelKind::Cnn),
            "bert" => Ok(ModelKind::Bert),
            "bilstm" | "bi-lstm" => Ok(ModelKind::Bilstm),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

/// Named numeric hyperparameters, recorded verbatim in every artifact.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyperparameters(BTreeMap<String, f64>);

struct Spec {
    name: &'static str,
    default: f64,
    min: f64,
    max: f64,
    range: &'static str,
    integer: bool,
}

const fn real(name: &'static str, default: f64, min: f64, max: f64, range: &'static str) -> Spec {
    Spec {
        name,
        default,
        min,
        max,
        range,
        integer: false,
    }
}

const fn int(name: &'static str, default: f64, min: f64, max: f64, range: &'static str) -> Spec {
    Spec {
        name,
        default,
        min,
        max,
        range,
        integer: true,
    }
}

const NB_SPECS: &[Spec] = &[
    real("alpha", 1.0, 0.0, 1e6, "[0, 1e6]"),
    int("min_df", 2.0, 1.0, 1e9, "integers >= 1"),
    int("max_vocab", 50_000.0, 1.0, 1e9, "integers >= 1"),
];

const LOGREG_SPECS: &[Spec] = &[
    real("learning_rate", 8.0, 1e-12, 1e3, "(0, 1e3]"),
    real("lr_decay", 0.9, 1e-12, 1.0, "(0, 1]"),
    int("epochs", 50.0, 1.0, 1e6, "integers in [1, 1e6]"),
    real("l2", 1e-4, 0.0, 1e12, "[0, 1e12]"),
    int("min_df", 2.0, 1.0, 1e9, "integers >= 1"),
    int("max_vocab", 50_000.0, 1.0, 1e9, "integers >= 1"),
];

const CNN_SPECS: &[Spec] = &[
    int("embed_dim", 64.0, 1.0, 4096.0, "integers in [1, 4096]"),
    int("filters", 64.0, 1.0, 4096.0, "integers in [1, 4096]"),
    int("min_width", 3.0, 1.0, 64.0, "integers in [1, 64]"),
    int(
        "max_width",
        5.0,
        1.0,
        64.0,
        "integers in [1, 64], >= min_width",
    ),
    int("max_len", 128.0, 1.0, 100_000.0, "integers >= max_width"),
    real("learning_rate", 0.01, 1e-12, 10.0, "(0, 10]"),
    real("momentum", 0.9, 0.0, 0.999_999, "[0, 1)"),
    int("batch_size", 32.0, 1.0, 1e6, "integers >= 1"),
    int("epochs", 5.0, 1.0, 1e4, "integers in [1, 1e4]"),
    real("init_scale", 0.05, 0.0, 10.0, "[0, 10]"),
    int("min_df", 2.0, 1.0, 1e9, "integers >= 1"),
    int("max_vocab", 50_000.0, 1.0, 1e9, "integers >= 1"),
];

fn specs(kind: ModelKind) -> &'static [Spec] {
    match kind {
        ModelKind::Nb => NB_SPECS,
        ModelKind::Logreg => LOGREG_SPECS,
        ModelKind::Cnn => CNN_SPECS,
        ModelKind::Bert | ModelKind::Bilstm => &[],
    }
}

impl Hyperparameters {
    pub fn defaults(kind: ModelKind) -> Self {
        Hyperparameters(
            specs(kind)
                .iter()
                .map(|s| (s.name.to_string(), s.default))
                .collect(),
        )
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) -> &mut Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Value or documented default for `kind`.
    pub fn value(&self, kind: ModelKind, name: &str) -> f64 {
        self.get(name)
            .or_else(|| {
                specs(kind)
                    .iter()
                    .find(|s| s.name == name)
                    .map(|s| s.default)
            })
            .unwrap_or(f64::NAN)
    }

    pub fn count(&self, kind: ModelKind, name: &str) -> usize {
        self.value(kind, name) as usize
    }

    /// Fill missing entries with defaults and check documented ranges.
    pub fn resolved(&self, kind: ModelKind) -> Result<Self, ModelError> {
        if !ModelKind::NATIVE.contains(&kind) {
            return Err(ModelError::Unsupported(kind));
        }
        let mut out = Hyperparameters::defaults(kind);
        for (k, v) in self.iter() {
            out.set(k, v);
        }
        for s in specs(kind) {
            let v = out.value(kind, s.name);
            let bad = !v.is_finite() || v < s.min || v > s.max || (s.integer && v.fract() != 0.0);
            if bad {
                return Err(ModelError::Hyperparameter {
                    name: s.name.to_string(),
                    value: v,
                    range: s.range,
                });
            }
        }
        if kind == ModelKind::Cnn {
            let (lo, hi, len) = (
                out.value(kind, "min_width"),
                out.value(kind, "max_width"),
                out.value(kind, "max_len"),
            );
            if hi < lo {
                return Err(ModelError::Hyperparameter {
                    name: "max_width".into(),
                    value: hi,
                    range: ">= min_width",
                });
            }
            if len < hi {
                return Err(ModelError::Hyperparameter {
                    name: "max_len".into(),
                    value: len,
                    range: ">= max_width",
                });
            }
        }
        Ok(out)
    }
}

/// A fitted binary classifier returning the probability of Fake.
pub trait TextClassifier: Send + Sync {
    fn model_id(&self) -> &str;

    /// Probability of Fake given a token sequence. `None` marks a masked
    /// position: sequence models substitute padding there, bag-of-words models
    /// ignore it.
    fn predict_terms(&self, terms: &[Option<&str>]) -> f64;

    /// Normalize, tokenize and score raw text.
    fn predict_proba(&self, text: &str) -> f64 {
        let (_, tokens) = analyze(text);
        let terms: Vec<Option<&str>> = tokens.iter().map(|t| Some(t.surface.as_str())).collect();
        self.predict_terms(&terms)
    }
}

impl<C: TextClassifier + ?Sized> TextClassifier for &C {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn predict_terms(&self, terms: &[Option<&str>]) -> f64 {
        (**self).predict_terms(terms)
    }
}

impl<C: TextClassifier + ?Sized> TextClassifier for std::sync::Arc<C> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn predict_terms(&self, terms: &[Option<&str>]) -> f64 {
        (**self).predict_terms(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_and_ranges_reject() {
        for kind in ModelKind::NATIVE {
            let hp = Hyperparameters::default().resolved(kind).unwrap();
            assert_eq!(hp, Hyperparameters::defaults(kind));
        }
        let bad = Hyperparameters::default().with("epochs", 2.5);
        assert!(matches!(
            bad.resolved(ModelKind::Logreg),
            Err(ModelError::Hyperparameter { .. })
        ));
        let bad = Hyperparameters::default().with("max_len", 4.0);
        assert!(bad.resolved(ModelKind::Cnn).is_err());
        assert!(matches!(
            Hyperparameters::default().resolved(ModelKind::Bert),
            Err(ModelError::Unsupported(ModelKind::Bert))
        ));
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("NB".parse::<ModelKind>().unwrap(), ModelKind::Nb);
        assert_eq!("bi-lstm".parse::<ModelKind>().unwrap(), ModelKind::Bilstm);
        assert!("svm".parse::<ModelKind>().is_err());
    }
}
