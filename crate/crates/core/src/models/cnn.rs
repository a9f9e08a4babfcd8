//! One-dimensional convolutional text classifier.
//!
//! embedding -> parallel convolutions (one bank per width, ReLU) -> global max
//! pool per filter -> concatenation -> dense layer to one logit -> sigmoid.
//!
//! The padding row of the embedding table is fixed at zero, so a window made
//! only of padding evaluates to `relu(bias)`. Windows that start past the last
//! real token are therefore all identical and are evaluated once.

use std::collections::BTreeMap;

use rand::Rng;

use crate::corpus::Corpus;
use crate::features::{sequence_from_terms, token_sequence, TokenSequence, Vocabulary, PAD};
use crate::models::artifact::{ArtifactError, Tensor};
use crate::models::{ModelError, TextClassifier};
use crate::rng::{rng_from_seed, shuffle};
use crate::scalar::{bce_with_logit, sigmoid, Scalar};
use crate::text::analyze;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnnShape {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub widths: Vec<usize>,
    pub filters: usize,
    pub max_len: usize,
}

impl CnnShape {
    pub fn standard(vocab_size: usize) -> Self {
        CnnShape {
            vocab_size,
            embed_dim: 64,
            widths: vec![3, 4, 5],
            filters: 64,
            max_len: 128,
        }
    }

    pub fn pooled_dim(&self) -> usize {
        self.widths.len() * self.filters
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    conv_w: Vec<usize>,
    conv_b: Vec<usize>,
    dense_w: usize,
    dense_b: usize,
    total: usize,
}

impl Layout {
    fn new(s: &CnnShape) -> Self {
        let mut at = s.vocab_size * s.embed_dim;
        let mut conv_w = Vec::new();
        let mut conv_b = Vec::new();
        for &w in &s.widths {
            conv_w.push(at);
            at += s.filters * w * s.embed_dim;
            conv_b.push(at);
            at += s.filters;
        }
        let dense_w = at;
        at += s.pooled_dim();
        Layout {
            conv_w,
            conv_b,
            dense_w,
            dense_b: at,
            total: at + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnnConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub init_scale: f64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            epochs: 5,
            init_scale: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CnnTrainingLog {
    pub train_losses: Vec<f64>,
    pub validation_losses: Vec<f64>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextCnn<T> {
    id: String,
    vocab: Vocabulary,
    shape: CnnShape,
    layout: Layout,
    params: Vec<T>,
}

struct Pass<T> {
    logit: T,
    pooled: Vec<T>,
    /// Start of the winning window per pooled unit; `None` for the all-padding window.
    argmax: Vec<Option<usize>>,
}

impl<T: Scalar> TextCnn<T> {
    /// Seeded initialization: embeddings uniform in `[-init_scale, init_scale]`
    /// (padding row zero), convolution and dense weights He/Glorot uniform,
    /// biases zero.
    pub fn new(vocab: Vocabulary, shape: CnnShape, init_scale: f64, seed: u64) -> Self {
        assert_eq!(vocab.len(), shape.vocab_size, "shape must match vocabulary");
        let layout = Layout::new(&shape);
        let mut params = vec![T::zero(); layout.total];
        let mut rng = rng_from_seed(seed);
        let mut uniform = |slot: &mut [T], limit: f64| {
            if limit > 0.0 {
                for p in slot {
                    *p = T::lit(rng.gen_range(-limit..=limit));
                }
            }
        };
        let d = shape.embed_dim;
        uniform(&mut params[d..shape.vocab_size * d], init_scale);
        for (k, &w) in shape.widths.iter().enumerate() {
            let start = layout.conv_w[k];
            uniform(
                &mut params[start..start + shape.filters * w * d],
                (6.0 / (w * d) as f64).sqrt(),
            );
        }
        let limit = (6.0 / (shape.pooled_dim() + 1) as f64).sqrt();
        uniform(&mut params[layout.dense_w..layout.dense_b], limit);
        TextCnn {
            id: "cnn-unsaved".to_string(),
            vocab,
            shape,
            layout,
            params,
        }
    }

    pub fn shape(&self) -> &CnnShape {
        &self.shape
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn sequence(&self, text: &str) -> TokenSequence {
        token_sequence(&analyze(text).1, &self.vocab, self.shape.max_len)
    }

    fn forward(&self, params: &[T], seq: &TokenSequence) -> Pass<T> {
        let s = &self.shape;
        let (d, nf) = (s.embed_dim, s.filters);
        let mut pooled = vec![T::zero(); s.pooled_dim()];
        let mut argmax = vec![None; s.pooled_dim()];
        let mut pre = vec![T::zero(); nf];
        for (k, &w) in s.widths.iter().enumerate() {
            let wbase = self.layout.conv_w[k];
            let bias = &params[self.layout.conv_b[k]..self.layout.conv_b[k] + nf];
            let windows = s.max_len + 1 - w;
            let real = seq.true_length.min(windows);
            let mut best: Vec<T> = vec![T::neg_infinity(); nf];
            let mut best_at: Vec<Option<usize>> = vec![None; nf];
            for p in 0..real {
                pre.copy_from_slice(bias);
                for j in 0..w {
                    let idx = seq.indices[p + j];
                    if idx == PAD {
                        continue;
                    }
                    let emb = &params[idx * d..(idx + 1) * d];
                    for (f, acc) in pre.iter_mut().enumerate() {
                        let row = &params[wbase + (f * w + j) * d..wbase + (f * w + j + 1) * d];
                        let mut dot = T::zero();
                        for (a, b) in row.iter().zip(emb) {
                            dot += *a * *b;
                        }
                        *acc += dot;
                    }
                }
                for f in 0..nf {
                    if pre[f] > best[f] {
                        best[f] = pre[f];
                        best_at[f] = Some(p);
                    }
                }
            }
            if windows > real {
                for f in 0..nf {
                    if bias[f] > best[f] {
                        best[f] = bias[f];
                        best_at[f] = None;
                    }
                }
            }
            for f in 0..nf {
                let u = k * nf + f;
                pooled[u] = best[f].max(T::zero());
                argmax[u] = best_at[f];
            }
        }
        let dense = &params[self.layout.dense_w..self.layout.dense_b];
        let mut logit = params[self.layout.dense_b];
        for (a, b) in dense.iter().zip(&pooled) {
            logit += *a * *b;
        }
        Pass {
            logit,
            pooled,
            argmax,
        }
    }

    fn backward(
        &self,
        params: &[T],
        seq: &TokenSequence,
        pass: &Pass<T>,
        dlogit: T,
        grad: &mut [T],
    ) {
        let s = &self.shape;
        let (d, nf) = (s.embed_dim, s.filters);
        grad[self.layout.dense_b] += dlogit;
        for (k, &w) in s.widths.iter().enumerate() {
            let wbase = self.layout.conv_w[k];
            for f in 0..nf {
                let u = k * nf + f;
                grad[self.layout.dense_w + u] += dlogit * pass.pooled[u];
                if pass.pooled[u] <= T::zero() {
                    continue;
                }
                let dpre = dlogit * params[self.layout.dense_w + u];
                grad[self.layout.conv_b[k] + f] += dpre;
                let Some(p) = pass.argmax[u] else { continue };
                for j in 0..w {
                    let idx = seq.indices[p + j];
                    if idx == PAD {
                        continue;
                    }
                    let wrow = wbase + (f * w + j) * d;
                    for e in 0..d {
                        grad[wrow + e] += dpre * params[idx * d + e];
                        grad[idx * d + e] += dpre * params[wrow + e];
                    }
                }
            }
        }
    }

    pub fn logit(&self, seq: &TokenSequence) -> T {
        self.forward(&self.params, seq).logit
    }

    /// Mean binary cross-entropy over `batch` and its gradient with respect to
    /// `params` (same layout as [`TextCnn::params`]).
    pub fn loss_and_gradient(&self, params: &[T], batch: &[(TokenSequence, T)]) -> (T, Vec<T>) {
        let mut grad = vec![T::zero(); params.len()];
        let (loss, _) = self.accumulate(
            params,
            batch.iter().map(|(s, y)| (s, *y)),
            batch.len(),
            &mut grad,
        );
        (loss, grad)
    }

    fn accumulate<'a, I>(&self, params: &[T], batch: I, n: usize, grad: &mut [T]) -> (T, usize)
    where
        I: Iterator<Item = (&'a TokenSequence, T)>,
    {
        let scale = T::one() / T::from_count(n.max(1));
        let mut loss = T::zero();
        let mut seen = 0;
        for (seq, y) in batch {
            let pass = self.forward(params, seq);
            loss += bce_with_logit(pass.logit, y);
            let dlogit = (sigmoid(pass.logit) - y) * scale;
            self.backward(params, seq, &pass, dlogit, grad);
            seen += 1;
        }
        (loss * scale, seen)
    }

    fn mean_loss(&self, data: &[(TokenSequence, T)]) -> T {
        let total: T = data
            .iter()
            .map(|(s, y)| bce_with_logit(self.logit(s), *y))
            .sum();
        total / T::from_count(data.len().max(1))
    }

    /// Mini-batch SGD with momentum on binary cross-entropy. The weights with
    /// the lowest validation loss at an epoch boundary are kept; without a
    /// validation set the final weights are kept and a warning is logged.
    pub fn fit(
        train: &Corpus,
        validation: &Corpus,
        vocab: &Vocabulary,
        shape: CnnShape,
        cfg: &CnnConfig,
        seed: u64,
    ) -> Result<(Self, CnnTrainingLog), ModelError> {
        if !train.has_both_classes() {
            return Err(ModelError::SingleClass("cnn"));
        }
        if vocab.is_empty() {
            return Err(ModelError::EmptyVocabulary);
        }
        let mut model = TextCnn::new(vocab.clone(), shape, cfg.init_scale, seed);
        let encode = |c: &Corpus| -> Vec<(TokenSequence, T)> {
            c.iter()
                .map(|i| (model.sequence(&i.text), T::lit(i.label.target())))
                .collect()
        };
        let train_data = encode(train);
        let val_data = encode(validation);

        let mut rng = rng_from_seed(crate::rng::derive_seed(seed, "cnn/batches"));
        let mut order: Vec<usize> = (0..train_data.len()).collect();
        let mut velocity = vec![T::zero(); model.params.len()];
        let mut grad = vec![T::zero(); model.params.len()];
        let lr = T::lit(cfg.learning_rate);
        let mu = T::lit(cfg.momentum);
        let mut log = CnnTrainingLog::default();
        let mut best: Option<(T, Vec<T>)> = None;

        for epoch in 1..=cfg.epochs {
            shuffle(&mut order, &mut rng);
            let mut epoch_loss = T::zero();
            for chunk in order.chunks(cfg.batch_size.max(1)) {
                grad.iter_mut().for_each(|g| *g = T::zero());
                let batch = chunk.iter().map(|&i| (&train_data[i].0, train_data[i].1));
                let (loss, _) = model.accumulate(&model.params, batch, chunk.len(), &mut grad);
                if !loss.is_finite() {
                    return Err(ModelError::Diverged { epoch });
                }
                epoch_loss += loss * T::from_count(chunk.len());
                for ((p, v), g) in model.params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                    *v = mu * *v + *g;
                    *p -= lr * *v;
                }
            }
            let train_loss = epoch_loss / T::from_count(train_data.len());
            if !train_loss.is_finite() {
                return Err(ModelError::Diverged { epoch });
            }
            log.train_losses.push(train_loss.to_f64_lossy());
            if !val_data.is_empty() {
                let val = model.mean_loss(&val_data);
                if !val.is_finite() {
                    return Err(ModelError::Diverged { epoch });
                }
                log.validation_losses.push(val.to_f64_lossy());
                if best.as_ref().is_none_or(|(b, _)| val < *b) {
                    best = Some((val, model.params.clone()));
                    log.best_epoch = epoch;
                }
            }
        }
        match best {
            Some((_, params)) => model.params = params,
            None => {
                log.best_epoch = cfg.epochs;
                log.warnings
                    .push("empty validation split: kept final-epoch weights".to_string());
            }
        }
        Ok((model, log))
    }

    pub(crate) fn set_id(&mut self, id: String) {
        self.id = id;
    }

    pub(crate) fn tensors(&self) -> BTreeMap<String, Tensor> {
        let s = &self.shape;
        let f64s = |r: std::ops::Range<usize>| {
            self.params[r]
                .iter()
                .map(|x| x.to_f64_lossy())
                .collect::<Vec<_>>()
        };
        let mut out = BTreeMap::new();
        out.insert(
            "embedding".to_string(),
            Tensor::new(
                vec![s.vocab_size, s.embed_dim],
                f64s(0..s.vocab_size * s.embed_dim),
            ),
        );
        for (k, &w) in s.widths.iter().enumerate() {
            let wstart = self.layout.conv_w[k];
            let bstart = self.layout.conv_b[k];
            out.insert(
                format!("conv{w}.weight"),
                Tensor::new(vec![s.filters, w, s.embed_dim], f64s(wstart..bstart)),
            );
            out.insert(
                format!("conv{w}.bias"),
                Tensor::new(vec![s.filters], f64s(bstart..bstart + s.filters)),
            );
        }
        out.insert(
            "dense.weight".to_string(),
            Tensor::new(
                vec![s.pooled_dim()],
                f64s(self.layout.dense_w..self.layout.dense_b),
            ),
        );
        out.insert(
            "dense.bias".to_string(),
            Tensor::new(vec![1], f64s(self.layout.dense_b..self.layout.total)),
        );
        out
    }

    pub(crate) fn from_tensors(
        vocab: Vocabulary,
        shape: CnnShape,
        tensors: &BTreeMap<String, Tensor>,
    ) -> Result<Self, ArtifactError> {
        let layout = Layout::new(&shape);
        let mut params = Vec::with_capacity(layout.total);
        let mut take = |name: &str, dims: &[usize]| -> Result<(), ArtifactError> {
            let t = Tensor::require(tensors, name, dims)?;
            params.extend(t.data.iter().map(|&x| T::lit(x)));
            Ok(())
        };
        take("embedding", &[shape.vocab_size, shape.embed_dim])?;
        for &w in &shape.widths {
            take(
                &format!("conv{w}.weight"),
                &[shape.filters, w, shape.embed_dim],
            )?;
            take(&format!("conv{w}.bias"), &[shape.filters])?;
        }
        take("dense.weight", &[shape.pooled_dim()])?;
        take("dense.bias", &[1])?;
        Ok(TextCnn {
            id: String::new(),
            vocab,
            shape,
            layout,
            params,
        })
    }
}

impl<T: Scalar> TextClassifier for TextCnn<T> {
    fn model_id(&self) -> &str {
        &self.id
    }

    fn predict_terms(&self, terms: &[Option<&str>]) -> f64 {
        let seq = sequence_from_terms(terms.iter().copied(), &self.vocab, self.shape.max_len);
        sigmoid(self.logit(&seq)).to_f64_lossy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, NewsItem, Source};

    fn tiny_vocab() -> Vocabulary {
        let words: Vec<String> = (0..18).map(|i| format!("w{i}")).collect();
        Vocabulary::build([words.join(" ").as_str()], 1, 100)
    }

    fn tiny_shape(vocab: &Vocabulary) -> CnnShape {
        CnnShape {
            vocab_size: vocab.len(),
            embed_dim: 6,
            widths: vec![2, 3],
            filters: 4,
            max_len: 8,
        }
    }

    #[test]
    fn all_padding_input_is_bias_driven() {
        let v = tiny_vocab();
        let mut m = TextCnn::<f64>::new(v.clone(), tiny_shape(&v), 0.05, 3);
        let empty = m.predict_proba("");
        assert_eq!(empty, m.predict_proba(""));
        assert_eq!(empty, 0.5, "zero biases give a zero logit");
        let dense_b = m.layout.dense_b;
        m.params_mut()[dense_b] = 1.0;
        assert!((m.predict_proba("") - sigmoid(1.0)).abs() < 1e-15);
        // the all-pad output ignores embeddings entirely
        m.params_mut()[2 * 6] = 9.0;
        assert!((m.predict_proba("") - sigmoid(1.0)).abs() < 1e-15);
    }

    #[test]
    fn padding_row_is_zero_and_layout_is_dense() {
        let v = tiny_vocab();
        let shape = tiny_shape(&v);
        let m = TextCnn::<f64>::new(v, shape.clone(), 0.05, 1);
        assert!(m.params()[..6].iter().all(|&x| x == 0.0));
        let expected = 20 * 6 + (4 * 2 * 6 + 4) + (4 * 3 * 6 + 4) + 8 + 1;
        assert_eq!(m.params().len(), expected);
        assert_eq!(shape.vocab_size, 20);
    }

    #[test]
    fn tensors_round_trip() {
        let v = tiny_vocab();
        let shape = tiny_shape(&v);
        let m = TextCnn::<f64>::new(v.clone(), shape.clone(), 0.05, 1);
        let back = TextCnn::<f64>::from_tensors(v, shape, &m.tensors()).unwrap();
        assert_eq!(back.params(), m.params());
    }

    fn separable(n: usize) -> Corpus {
        let fake = ["hoax", "plandemic", "microchip", "garlic", "bleach"];
        let real = ["trial", "study", "guidance", "hospital", "data"];
        let shared = ["covid", "news", "today", "says", "report"];
        let items = (0..n)
            .map(|k| {
                let (words, label) = if k % 2 == 0 {
                    (&fake, Label::Fake)
                } else {
                    (&real, Label::Real)
                };
                NewsItem {
                    id: format!("s{k}"),
                    text: format!(
                        "{} {} {} {}",
                        shared[k % 5],
                        words[k % 5],
                        shared[(k + 2) % 5],
                        words[(k / 3) % 5]
                    ),
                    label,
                    source: Source::Other,
                }
            })
            .collect();
        Corpus::new("sep", items).unwrap()
    }

    #[test]
    fn separable_set_is_learned() {
        let c = separable(40);
        let v = Vocabulary::from_corpus(&c, 1, 1000);
        let shape = CnnShape {
            max_len: 16,
            ..CnnShape::standard(v.len())
        };
        let cfg = CnnConfig {
            epochs: 20,
            batch_size: 8,
            ..Default::default()
        };
        let (m, log) = TextCnn::<f64>::fit(&c, &c, &v, shape, &cfg, 5).unwrap();
        let correct = c
            .iter()
            .filter(|i| Label::from_probability(m.predict_proba(&i.text)) == i.label)
            .count();
        assert!(correct as f64 / 40.0 >= 0.95, "{correct}/40, log {log:?}");
        assert_eq!(log.validation_losses.len(), 20);
    }

    #[test]
    fn empty_validation_keeps_final_weights_with_warning() {
        let c = separable(10);
        let v = Vocabulary::from_corpus(&c, 1, 1000);
        let shape = CnnShape {
            embed_dim: 4,
            filters: 2,
            max_len: 8,
            ..CnnShape::standard(v.len())
        };
        let empty = Corpus::from_items_allow_repeats("none", vec![]);
        let cfg = CnnConfig {
            epochs: 2,
            ..Default::default()
        };
        let (_, log) = TextCnn::<f64>::fit(&c, &empty, &v, shape, &cfg, 1).unwrap();
        assert_eq!(log.best_epoch, 2);
        assert_eq!(log.warnings.len(), 1);
        assert!(log.validation_losses.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let c = separable(12);
        let v = Vocabulary::from_corpus(&c, 1, 1000);
        let shape = CnnShape {
            embed_dim: 4,
            filters: 3,
            max_len: 8,
            ..CnnShape::standard(v.len())
        };
        let cfg = CnnConfig {
            epochs: 2,
            batch_size: 4,
            ..Default::default()
        };
        let (a, _) = TextCnn::<f64>::fit(&c, &c, &v, shape.clone(), &cfg, 9).unwrap();
        let (b, _) = TextCnn::<f64>::fit(&c, &c, &v, shape, &cfg, 9).unwrap();
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn single_precision_trains() {
        let c = separable(40);
        let v = Vocabulary::from_corpus(&c, 1, 1000);
        let shape = CnnShape {
            embed_dim: 16,
            filters: 8,
            max_len: 12,
            ..CnnShape::standard(v.len())
        };
        let cfg = CnnConfig {
            epochs: 20,
            batch_size: 8,
            ..Default::default()
        };
        let (m, _) = TextCnn::<f32>::fit(&c, &c, &v, shape, &cfg, 5).unwrap();
        let p = m.predict_proba("hoax garlic");
        assert!((0.0..=1.0).contains(&p));
    }
}
