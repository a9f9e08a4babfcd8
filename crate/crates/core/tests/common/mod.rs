#![allow(dead_code)]

use std::path::PathBuf;

use newsxplain::corpus::{ingest, Corpus, FieldMapping, Format, Source};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn coaid() -> Corpus {
    ingest(
        &fixture("coaid_like.jsonl"),
        Format::Jsonl,
        &FieldMapping::standard(Source::CoAid),
    )
    .unwrap()
    .0
}

pub fn c19() -> Corpus {
    ingest(
        &fixture("c19rumor_like.jsonl"),
        Format::Jsonl,
        &FieldMapping::standard(Source::C19Rumor),
    )
    .unwrap()
    .0
}

use newsxplain::dataset::{build_configuration, ConfigName, DatasetConfiguration};
use newsxplain::models::artifact::train_model;
use newsxplain::models::{Hyperparameters, ModelArtifact, ModelKind};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn c1() -> DatasetConfiguration {
    build_configuration(ConfigName::C1, &coaid(), &c19(), 42).unwrap()
}

/// Fixture models trained on C1; the CNN is kept small so exhaustive
/// explanation stays fast.
pub fn fixture_model(kind: ModelKind, c1: &DatasetConfiguration) -> ModelArtifact {
    let mut hp = Hyperparameters::defaults(kind);
    if kind == ModelKind::Cnn {
        hp = hp
            .with("embed_dim", 16.0)
            .with("filters", 8.0)
            .with("epochs", 2.0);
    }
    train_model(kind, &c1.train, &c1.validation, &hp, 42).unwrap()
}

/// Random text of `n` words drawn from the fixture corpus plus a few
/// out-of-vocabulary strings.
pub fn random_text<R: Rng>(rng: &mut R, corpus: &Corpus, n: usize) -> String {
    let item = corpus.items().choose(rng).unwrap();
    let words: Vec<&str> = item.text.split_whitespace().collect();
    (0..n)
        .map(|_| {
            if rng.gen::<f64>() < 0.1 {
                format!("zq{}", rng.gen_range(0..1000))
            } else {
                words.choose(rng).unwrap().to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}
