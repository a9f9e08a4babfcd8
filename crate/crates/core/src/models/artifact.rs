//! Self-describing model files.
//!
//! A file is one JSON object:
//!
//! ```text
//! { "format_version": 1, "model_kind": "nb" | "logreg" | "cnn",
//!   "hyperparameters": {..}, "training_meta": {..}, "vocabulary": {..},
//!   "parameters": { name: { "shape": [..], "data": base64(f64 little-endian) } },
//!   "checksum": hex(sha256(canonical JSON of "parameters")) }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Corpus, Label};
use crate::features::Vocabulary;
use crate::models::cnn::{CnnConfig, CnnShape, TextCnn};
use crate::models::logreg::{LogRegConfig, LogisticRegression};
use crate::models::nb::NaiveBayes;
use crate::models::{Hyperparameters, ModelError, ModelKind, TextClassifier};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt artifact: {0}")]
    Corrupt(String),
    #[error("unsupported artifact format_version {found} (this build reads up to {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("model kind `{0}` has no native implementation")]
    UnsupportedKind(ModelKind),
}

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Tensor { shape, data }
    }

    pub(crate) fn require<'a>(
        tensors: &'a BTreeMap<String, Tensor>,
        name: &str,
        shape: &[usize],
    ) -> Result<&'a Tensor, ArtifactError> {
        let t = tensors
            .get(name)
            .ok_or_else(|| ArtifactError::Corrupt(format!("missing parameter `{name}`")))?;
        if t.shape != shape {
            return Err(ArtifactError::Corrupt(format!(
                "parameter `{name}` has shape {:?}, expected {shape:?}",
                t.shape
            )));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub config: Option<String>,
    pub seed: u64,
    pub epochs: usize,
    pub train_losses: Vec<f64>,
    #[serde(default)]
    pub validation_losses: Vec<f64>,
    pub final_train_loss: Option<f64>,
    pub final_validation_loss: Option<f64>,
    #[serde(default)]
    pub best_epoch: Option<usize>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub model_kind: ModelKind,
    pub hyperparameters: Hyperparameters,
    pub training_meta: TrainingMeta,
    pub vocabulary: Vocabulary,
    pub parameters: BTreeMap<String, Tensor>,
}

#[derive(Serialize, Deserialize)]
struct TensorFile {
    shape: Vec<usize>,
    data: String,
}

#[derive(Serialize, Deserialize)]
struct ArtifactFile {
    format_version: u32,
    model_kind: ModelKind,
    hyperparameters: Hyperparameters,
    training_meta: TrainingMeta,
    vocabulary: Vocabulary,
    parameters: BTreeMap<String, TensorFile>,
    checksum: String,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

fn encode_tensor(t: &Tensor) -> TensorFile {
    let mut bytes = Vec::with_capacity(t.data.len() * 8);
    for x in &t.data {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    TensorFile {
        shape: t.shape.clone(),
        data: BASE64.encode(bytes),
    }
}

fn decode_tensor(name: &str, t: &TensorFile) -> Result<Tensor, ArtifactError> {
    let bytes = BASE64
        .decode(&t.data)
        .map_err(|e| ArtifactError::Corrupt(format!("parameter `{name}`: {e}")))?;
    let expected = t.shape.iter().product::<usize>() * 8;
    if bytes.len() != expected {
        return Err(ArtifactError::Corrupt(format!(
            "parameter `{name}` holds {} bytes, shape needs {expected}",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(Tensor {
        shape: t.shape.clone(),
        data,
    })
}

fn checksum(parameters: &BTreeMap<String, TensorFile>) -> String {
    let canonical = serde_json::to_vec(parameters).expect("parameters serialize");
    hex::encode(Sha256::digest(&canonical))
}

impl ModelArtifact {
    fn encoded(&self) -> BTreeMap<String, TensorFile> {
        self.parameters
            .iter()
            .map(|(k, t)| (k.clone(), encode_tensor(t)))
            .collect()
    }

    pub fn checksum(&self) -> String {
        checksum(&self.encoded())
    }

    /// `<kind>-<first 12 hex digits of the checksum>`.
    pub fn model_id(&self) -> String {
        format!("{}-{}", self.model_kind, &self.checksum()[..12])
    }

    pub fn to_json(&self) -> String {
        let parameters = self.encoded();
        let file = ArtifactFile {
            format_version: self.format_version,
            model_kind: self.model_kind,
            hyperparameters: self.hyperparameters.clone(),
            training_meta: self.training_meta.clone(),
            vocabulary: self.vocabulary.clone(),
            checksum: checksum(&parameters),
            parameters,
        };
        serde_json::to_string(&file).expect("artifact serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, ArtifactError> {
        let probe: VersionProbe =
            serde_json::from_str(json).map_err(|e| ArtifactError::Corrupt(e.to_string()))?;
        if probe.format_version > FORMAT_VERSION || probe.format_version == 0 {
            return Err(ArtifactError::UnsupportedVersion {
                found: probe.format_version,
                supported: FORMAT_VERSION,
            });
        }
        let file: ArtifactFile =
            serde_json::from_str(json).map_err(|e| ArtifactError::Corrupt(e.to_string()))?;
        if checksum(&file.parameters) != file.checksum {
            return Err(ArtifactError::Corrupt(
                "parameter checksum mismatch".to_string(),
            ));
        }
        let parameters = file
            .parameters
            .iter()
            .map(|(k, t)| decode_tensor(k, t).map(|t| (k.clone(), t)))
            .collect::<Result<_, _>>()?;
        let artifact = ModelArtifact {
            format_version: file.format_version,
            model_kind: file.model_kind,
            hyperparameters: file.hyperparameters,
            training_meta: file.training_meta,
            vocabulary: file.vocabulary,
            parameters,
        };
        // shape validation
        artifact.load_model()?;
        Ok(artifact)
    }

    fn cnn_shape(&self) -> CnnShape {
        let hp = &self.hyperparameters;
        let k = ModelKind::Cnn;
        CnnShape {
            vocab_size: self.vocabulary.len(),
            embed_dim: hp.count(k, "embed_dim"),
            widths: (hp.count(k, "min_width")..=hp.count(k, "max_width")).collect(),
            filters: hp.count(k, "filters"),
            max_len: hp.count(k, "max_len"),
        }
    }

    /// Instantiate the model in `f64`.
    pub fn load_model(&self) -> Result<LoadedModel, ArtifactError> {
        let vocab = self.vocabulary.clone();
        let id = self.model_id();
        let inner = match self.model_kind {
            ModelKind::Nb => {
                let mut m = NaiveBayes::from_tensors(vocab, &self.parameters)?;
                m.set_id(id.clone());
                Classifier::Nb(m)
            }
            ModelKind::Logreg => {
                let mut m = LogisticRegression::from_tensors(vocab, &self.parameters)?;
                m.set_id(id.clone());
                Classifier::Logreg(m)
            }
            ModelKind::Cnn => {
                let mut m = TextCnn::from_tensors(vocab, self.cnn_shape(), &self.parameters)?;
                m.set_id(id.clone());
                Classifier::Cnn(m)
            }
            other => return Err(ArtifactError::UnsupportedKind(other)),
        };
        Ok(LoadedModel {
            inner,
            kind: self.model_kind,
        })
    }

    /// Probability of Fake for one text.
    pub fn predict_proba(&self, text: &str) -> Result<f64, ArtifactError> {
        Ok(self.load_model()?.predict_proba(text))
    }
}

/// Serialize to `path`.
pub fn save_artifact(artifact: &ModelArtifact, path: &Path) -> Result<(), ArtifactError> {
    fs::write(path, artifact.to_json()).map_err(|source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_artifact(path: &Path) -> Result<ModelArtifact, ArtifactError> {
    let text = fs::read(path).map_err(|source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text =
        String::from_utf8(text).map_err(|_| ArtifactError::Corrupt("not UTF-8".to_string()))?;
    ModelArtifact::from_json(&text)
}

#[derive(Debug, Clone)]
enum Classifier {
    Nb(NaiveBayes<f64>),
    Logreg(LogisticRegression<f64>),
    Cnn(TextCnn<f64>),
}

/// A ready-to-score model restored from an artifact.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    inner: Classifier,
    kind: ModelKind,
}

impl LoadedModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn label(&self, text: &str) -> Label {
        Label::from_probability(self.predict_proba(text))
    }
}

impl TextClassifier for LoadedModel {
    fn model_id(&self) -> &str {
        match &self.inner {
            Classifier::Nb(m) => m.model_id(),
            Classifier::Logreg(m) => m.model_id(),
            Classifier::Cnn(m) => m.model_id(),
        }
    }

    fn predict_terms(&self, terms: &[Option<&str>]) -> f64 {
        match &self.inner {
            Classifier::Nb(m) => m.predict_terms(terms),
            Classifier::Logreg(m) => m.predict_terms(terms),
            Classifier::Cnn(m) => m.predict_terms(terms),
        }
    }
}

fn artifact(
    kind: ModelKind,
    hp: Hyperparameters,
    meta: TrainingMeta,
    vocab: &Vocabulary,
    parameters: BTreeMap<String, Tensor>,
) -> ModelArtifact {
    ModelArtifact {
        format_version: FORMAT_VERSION,
        model_kind: kind,
        hyperparameters: hp,
        training_meta: meta,
        vocabulary: vocab.clone(),
        parameters,
    }
}

/// Fit multinomial naive Bayes (`alpha` from the hyperparameters).
pub fn train_naive_bayes(
    train: &Corpus,
    vocab: &Vocabulary,
    hp: &Hyperparameters,
) -> Result<ModelArtifact, ModelError> {
    let hp = hp.resolved(ModelKind::Nb)?;
    let model = NaiveBayes::<f64>::fit(train, vocab, hp.value(ModelKind::Nb, "alpha"))?;
    let meta = TrainingMeta {
        epochs: 1,
        ..Default::default()
    };
    Ok(artifact(ModelKind::Nb, hp, meta, vocab, model.tensors()))
}

pub fn train_logreg(
    train: &Corpus,
    vocab: &Vocabulary,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<ModelArtifact, ModelError> {
    let hp = hp.resolved(ModelKind::Logreg)?;
    let k = ModelKind::Logreg;
    let cfg = LogRegConfig {
        learning_rate: hp.value(k, "learning_rate"),
        lr_decay: hp.value(k, "lr_decay"),
        epochs: hp.count(k, "epochs"),
        l2: hp.value(k, "l2"),
    };
    let (model, losses) = LogisticRegression::<f64>::fit(train, vocab, &cfg)?;
    let meta = TrainingMeta {
        seed,
        epochs: cfg.epochs,
        final_train_loss: losses.last().copied(),
        train_losses: losses,
        ..Default::default()
    };
    Ok(artifact(k, hp, meta, vocab, model.tensors()))
}

pub fn train_cnn(
    train: &Corpus,
    validation: &Corpus,
    vocab: &Vocabulary,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<ModelArtifact, ModelError> {
    let hp = hp.resolved(ModelKind::Cnn)?;
    let k = ModelKind::Cnn;
    let shape = CnnShape {
        vocab_size: vocab.len(),
        embed_dim: hp.count(k, "embed_dim"),
        widths: (hp.count(k, "min_width")..=hp.count(k, "max_width")).collect(),
        filters: hp.count(k, "filters"),
        max_len: hp.count(k, "max_len"),
    };
    let cfg = CnnConfig {
        learning_rate: hp.value(k, "learning_rate"),
        momentum: hp.value(k, "momentum"),
        batch_size: hp.count(k, "batch_size"),
        epochs: hp.count(k, "epochs"),
        init_scale: hp.value(k, "init_scale"),
    };
    let (model, log) = TextCnn::<f64>::fit(train, validation, vocab, shape, &cfg, seed)?;
    let meta = TrainingMeta {
        seed,
        epochs: cfg.epochs,
        final_train_loss: log.train_losses.last().copied(),
        final_validation_loss: log
            .validation_losses
            .get(log.best_epoch.wrapping_sub(1))
            .copied(),
        train_losses: log.train_losses,
        validation_losses: log.validation_losses,
        best_epoch: Some(log.best_epoch),
        warnings: log.warnings,
        config: None,
    };
    Ok(artifact(k, hp, meta, vocab, model.tensors()))
}

/// Build the vocabulary from `train` with the kind's `min_df`/`max_vocab`
/// settings and fit the requested model.
pub fn train_model(
    kind: ModelKind,
    train: &Corpus,
    validation: &Corpus,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<ModelArtifact, ModelError> {
    let resolved = hp.resolved(kind)?;
    let vocab = Vocabulary::from_corpus(
        train,
        resolved.count(kind, "min_df"),
        resolved.count(kind, "max_vocab"),
    );
    match kind {
        ModelKind::Nb => train_naive_bayes(train, &vocab, &resolved),
        ModelKind::Logreg => train_logreg(train, &vocab, &resolved, seed),
        ModelKind::Cnn => train_cnn(train, validation, &vocab, &resolved, seed),
        other => Err(ModelError::Unsupported(other)),
    }
}
