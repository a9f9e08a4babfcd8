//! L2-regularized logistic regression over tf-idf vectors.

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::features::{tfidf_vector, Vocabulary, WeightedVector};
use crate::models::artifact::{ArtifactError, Tensor};
use crate::models::{ModelError, TextClassifier};
use crate::scalar::{bce_with_logit, sigmoid, Scalar};
use crate::text::{analyze, Token};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    /// Multiplier applied to the learning rate after every epoch.
    pub lr_decay: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            learning_rate: 8.0,
            lr_decay: 0.9,
            epochs: 50,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression<T> {
    id: String,
    vocab: Vocabulary,
    idf: Vec<T>,
    weights: Vec<T>,
    bias: T,
}

/// Objective value and gradient for a full batch.
#[derive(Debug, Clone)]
pub struct LossGradient<T> {
    pub loss: T,
    pub weights: Vec<T>,
    pub bias: T,
}

/// `mean_i BCE(w.x_i + b, y_i) + (l2 / 2) |w|^2` and its gradient.
pub fn objective<T: Scalar>(
    features: &[WeightedVector<T>],
    targets: &[T],
    weights: &[T],
    bias: T,
    l2: T,
) -> LossGradient<T> {
    let n = T::from_count(features.len().max(1));
    let mut grad_w = vec![T::zero(); weights.len()];
    let mut grad_b = T::zero();
    let mut loss = T::zero();
    for (x, &y) in features.iter().zip(targets) {
        let z = x.dot(weights) + bias;
        loss += bce_with_logit(z, y);
        let r = (sigmoid(z) - y) / n;
        grad_b += r;
        for &(i, v) in &x.entries {
            grad_w[i] += r * v;
        }
    }
    let half = T::lit(0.5);
    let mut penalty = T::zero();
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g += l2 * w;
        penalty += w * w;
    }
    LossGradient {
        loss: loss / n + half * l2 * penalty,
        weights: grad_w,
        bias: grad_b,
    }
}

impl<T: Scalar> LogisticRegression<T> {
    pub fn features(&self, tokens: &[Token]) -> WeightedVector<T> {
        tfidf_vector(tokens, &self.vocab, &self.idf)
    }

    /// Full-batch proximal gradient descent from zero weights.
    ///
    /// Each epoch takes a gradient step on the data term, then applies the L2
    /// term in closed form, `w <- w / (1 + lr * l2)`, which stays stable for
    /// any penalty strength. Returns the model and the objective after every
    /// epoch.
    pub fn fit(
        train: &Corpus,
        vocab: &Vocabulary,
        cfg: &LogRegConfig,
    ) -> Result<(Self, Vec<f64>), ModelError> {
        if !train.has_both_classes() {
            return Err(ModelError::SingleClass("logistic regression"));
        }
        if vocab.is_empty() {
            return Err(ModelError::EmptyVocabulary);
        }
        let idf = vocab.idf::<T>();
        let features: Vec<WeightedVector<T>> = train
            .iter()
            .map(|item| tfidf_vector(&analyze(&item.text).1, vocab, &idf))
            .collect();
        let targets: Vec<T> = train.iter().map(|i| T::lit(i.label.target())).collect();
        let (weights, bias, losses) = Self::descend(&features, &targets, vocab.len(), cfg)?;
        Ok((
            LogisticRegression {
                id: "logreg-unsaved".to_string(),
                vocab: vocab.clone(),
                idf,
                weights,
                bias,
            },
            losses,
        ))
    }

    /// The optimizer loop on precomputed features.
    pub fn descend(
        features: &[WeightedVector<T>],
        targets: &[T],
        dim: usize,
        cfg: &LogRegConfig,
    ) -> Result<(Vec<T>, T, Vec<f64>), ModelError> {
        let l2 = T::lit(cfg.l2);
        let mut lr = T::lit(cfg.learning_rate);
        let decay = T::lit(cfg.lr_decay);
        let mut w = vec![T::zero(); dim];
        let mut b = T::zero();
        let mut losses = Vec::with_capacity(cfg.epochs);
        for epoch in 1..=cfg.epochs {
            // data-term gradient only; the penalty is handled by the shrink below
            let g = objective(features, targets, &w, b, T::zero());
            let shrink = T::one() / (T::one() + lr * l2);
            for (wi, gi) in w.iter_mut().zip(&g.weights) {
                *wi = (*wi - lr * *gi) * shrink;
            }
            b -= lr * g.bias;
            let loss = objective(features, targets, &w, b, l2).loss;
            if !loss.is_finite() || w.iter().any(|x| !x.is_finite()) || !b.is_finite() {
                return Err(ModelError::Diverged { epoch });
            }
            losses.push(loss.to_f64_lossy());
            lr *= decay;
        }
        Ok((w, b, losses))
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn proba(&self, terms: &[Option<&str>]) -> T {
        let tokens: Vec<Token> = terms
            .iter()
            .flatten()
            .map(|s| Token {
                surface: s.to_string(),
                start: 0,
                end: 0,
            })
            .collect();
        sigmoid(self.features(&tokens).dot(&self.weights) + self.bias)
    }

    pub(crate) fn set_id(&mut self, id: String) {
        self.id = id;
    }

    pub(crate) fn tensors(&self) -> BTreeMap<String, Tensor> {
        BTreeMap::from([
            (
                "weights".to_string(),
                Tensor::new(
                    vec![self.weights.len()],
                    self.weights.iter().map(|x| x.to_f64_lossy()).collect(),
                ),
            ),
            (
                "bias".to_string(),
                Tensor::new(vec![1], vec![self.bias.to_f64_lossy()]),
            ),
        ])
    }

    pub(crate) fn from_tensors(
        vocab: Vocabulary,
        tensors: &BTreeMap<String, Tensor>,
    ) -> Result<Self, ArtifactError> {
        let w = Tensor::require(tensors, "weights", &[vocab.len()])?;
        let b = Tensor::require(tensors, "bias", &[1])?;
        Ok(LogisticRegression {
            id: String::new(),
            idf: vocab.idf::<T>(),
            vocab,
            weights: w.data.iter().map(|&x| T::lit(x)).collect(),
            bias: T::lit(b.data[0]),
        })
    }
}

impl<T: Scalar> TextClassifier for LogisticRegression<T> {
    fn model_id(&self) -> &str {
        &self.id
    }

    fn predict_terms(&self, terms: &[Option<&str>]) -> f64 {
        self.proba(terms).to_f64_lossy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, NewsItem, Source};

    fn separable(n: usize) -> Corpus {
        let fake = ["hoax", "plandemic", "microchip", "garlic", "cure"];
        let real = ["trial", "study", "guidance", "health", "data"];
        let items = (0..n)
            .map(|k| {
                let (words, label) = if k % 2 == 0 {
                    (&fake, Label::Fake)
                } else {
                    (&real, Label::Real)
                };
                NewsItem {
                    id: format!("s{k}"),
                    text: format!("{} {} news", words[k % 5], words[(k / 2 + 1) % 5]),
                    label,
                    source: Source::Other,
                }
            })
            .collect();
        Corpus::new("sep", items).unwrap()
    }

    #[test]
    fn separable_set_is_learned() {
        let c = separable(20);
        let v = Vocabulary::from_corpus(&c, 1, 1000);
        let (m, losses) = LogisticRegression::<f64>::fit(&c, &v, &LogRegConfig::default()).unwrap();
        let correct = c
            .iter()
            .filter(|i| Label::from_probability(m.predict_proba(&i.text)) == i.label)
            .count();
        assert!(correct as f64 / 20.0 >= 0.99, "{correct}/20");
        assert_eq!(losses.len(), 50);
        assert!(losses.windows(2).all(|p| p[1] <= p[0] + 1e-15));
    }

    #[test]
    fn huge_penalty_collapses_weights() {
        let c = separable(20);
        let v = Vocabulary::from_corpus(&c, 1, 1000);
        let cfg = LogRegConfig {
            l2: 1e6,
            ..Default::default()
        };
        let (m, _) = LogisticRegression::<f64>::fit(&c, &v, &cfg).unwrap();
        let norm: f64 = m.weights().iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "{norm}");
        let ps: Vec<f64> = c.iter().map(|i| m.predict_proba(&i.text)).collect();
        let spread = ps.iter().cloned().fold(f64::MIN, f64::max)
            - ps.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6);
        // balanced classes: the bias stays at the prior log-odds of zero
        assert!((ps[0] - 0.5).abs() < 1e-6, "{}", ps[0]);
    }

    #[test]
    fn divergence_names_the_epoch() {
        let x = vec![WeightedVector {
            dim: 1,
            entries: vec![(0, 1e308f64)],
        }];
        let err = LogisticRegression::<f64>::descend(&x, &[1.0], 1, &LogRegConfig::default())
            .unwrap_err();
        assert!(matches!(err, ModelError::Diverged { epoch: 1 }));
    }

    #[test]
    fn gradient_matches_central_differences() {
        // 5 features, 4 examples, nonzero weights so every term participates
        let x = vec![
            WeightedVector {
                dim: 5,
                entries: vec![(0, 0.6), (2, 0.8)],
            },
            WeightedVector {
                dim: 5,
                entries: vec![(1, 0.3), (3, -0.4), (4, 0.866)],
            },
            WeightedVector {
                dim: 5,
                entries: vec![(0, -0.5), (4, 0.5)],
            },
            WeightedVector {
                dim: 5,
                entries: vec![(2, 1.0)],
            },
        ];
        let y = [1.0, 0.0, 1.0, 0.0];
        let w = [0.3, -1.2, 0.7, 0.05, -0.4];
        let b = 0.15;
        let l2 = 0.01;
        let g = objective(&x, &y, &w, b, l2);
        let eps = 1e-5;
        let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-12);
        for i in 0..5 {
            let mut wp = w;
            let mut wm = w;
            wp[i] += eps;
            wm[i] -= eps;
            let fd = (objective(&x, &y, &wp, b, l2).loss - objective(&x, &y, &wm, b, l2).loss)
                / (2.0 * eps);
            assert!(
                rel(g.weights[i], fd) < 1e-6,
                "w{i}: {} vs {fd}",
                g.weights[i]
            );
        }
        let fd = (objective(&x, &y, &w, b + eps, l2).loss
            - objective(&x, &y, &w, b - eps, l2).loss)
            / (2.0 * eps);
        assert!(rel(g.bias, fd) < 1e-6);
    }
}
