//! Multinomial naive Bayes over in-vocabulary token counts.

use std::collections::BTreeMap;

use crate::corpus::{Corpus, Label};
use crate::features::{Vocabulary, UNK};
use crate::models::artifact::{ArtifactError, Tensor};
use crate::models::{ModelError, TextClassifier};
use crate::scalar::{sigmoid, Scalar};
use crate::text::analyze;

/// Class index 0 is Real, 1 is Fake.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes<T> {
    id: String,
    vocab: Vocabulary,
    log_prior: [T; 2],
    /// `log P(term | class)`, indexed by vocabulary index.
    log_likelihood: [Vec<T>; 2],
}

fn class_index(label: Label) -> usize {
    match label {
        Label::Real => 0,
        Label::Fake => 1,
    }
}

impl<T: Scalar> NaiveBayes<T> {
    /// Laplace-smoothed estimates:
    /// `P(t|c) = (count(t,c) + alpha) / (total(c) + alpha * |V|)` with `|V|`
    /// the number of corpus terms, and priors from class frequencies.
    pub fn fit(train: &Corpus, vocab: &Vocabulary, alpha: T) -> Result<Self, ModelError> {
        if !train.has_both_classes() {
            return Err(ModelError::SingleClass("naive Bayes"));
        }
        if vocab.is_empty() {
            return Err(ModelError::EmptyVocabulary);
        }
        let v = vocab.len();
        let mut counts = [vec![0usize; v], vec![0usize; v]];
        let mut docs = [0usize; 2];
        for item in train.iter() {
            let c = class_index(item.label);
            docs[c] += 1;
            let (_, tokens) = analyze(&item.text);
            for t in &tokens {
                if let Some(i) = vocab.get(&t.surface) {
                    counts[c][i] += 1;
                }
            }
        }
        let n_terms = T::from_count(v - 2);
        let n_docs = T::from_count(train.len());
        let mut log_likelihood = [vec![T::zero(); v], vec![T::zero(); v]];
        for c in 0..2 {
            let total = T::from_count(counts[c].iter().sum());
            let denom = total + alpha * n_terms;
            for i in (UNK + 1)..v {
                log_likelihood[c][i] = ((T::from_count(counts[c][i]) + alpha) / denom).ln();
            }
        }
        Ok(NaiveBayes {
            id: "nb-unsaved".to_string(),
            vocab: vocab.clone(),
            log_prior: [
                (T::from_count(docs[0]) / n_docs).ln(),
                (T::from_count(docs[1]) / n_docs).ln(),
            ],
            log_likelihood,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Class log-joint scores `[real, fake]` for the given terms.
    pub fn log_joint(&self, terms: &[Option<&str>]) -> [T; 2] {
        let mut score = self.log_prior;
        for term in terms.iter().flatten() {
            if let Some(i) = self.vocab.get(term) {
                score[0] += self.log_likelihood[0][i];
                score[1] += self.log_likelihood[1][i];
            }
        }
        score
    }

    pub fn proba(&self, terms: &[Option<&str>]) -> T {
        let [real, fake] = self.log_joint(terms);
        let diff = fake - real;
        if diff.is_nan() {
            // both classes impossible (alpha = 0): fall back to the prior
            return sigmoid(self.log_prior[1] - self.log_prior[0]);
        }
        sigmoid(diff)
    }

    pub(crate) fn set_id(&mut self, id: String) {
        self.id = id;
    }

    pub(crate) fn tensors(&self) -> BTreeMap<String, Tensor> {
        let v = self.vocab.len();
        let mut ll = Vec::with_capacity(2 * v);
        ll.extend(self.log_likelihood[0].iter().map(|x| x.to_f64_lossy()));
        ll.extend(self.log_likelihood[1].iter().map(|x| x.to_f64_lossy()));
        BTreeMap::from([
            (
                "log_prior".to_string(),
                Tensor::new(
                    vec![2],
                    self.log_prior.iter().map(|x| x.to_f64_lossy()).collect(),
                ),
            ),
            ("log_likelihood".to_string(), Tensor::new(vec![2, v], ll)),
        ])
    }

    pub(crate) fn from_tensors(
        vocab: Vocabulary,
        tensors: &BTreeMap<String, Tensor>,
    ) -> Result<Self, ArtifactError> {
        let v = vocab.len();
        let prior = Tensor::require(tensors, "log_prior", &[2])?;
        let ll = Tensor::require(tensors, "log_likelihood", &[2, v])?;
        let cast = |xs: &[f64]| xs.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        Ok(NaiveBayes {
            id: String::new(),
            vocab,
            log_prior: [T::lit(prior.data[0]), T::lit(prior.data[1])],
            log_likelihood: [cast(&ll.data[..v]), cast(&ll.data[v..])],
        })
    }
}

impl<T: Scalar> TextClassifier for NaiveBayes<T> {
    fn model_id(&self) -> &str {
        &self.id
    }

    fn predict_terms(&self, terms: &[Option<&str>]) -> f64 {
        self.proba(terms).to_f64_lossy()
    }
}
