//! Vocabulary, tf-idf vectors and fixed-length index sequences.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::scalar::Scalar;
use crate::text::{analyze, Token};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TERM: &str = "<pad>";
pub const UNK_TERM: &str = "<unk>";

pub const DEFAULT_MIN_DF: usize = 2;
pub const DEFAULT_MAX_SIZE: usize = 50_000;
pub const DEFAULT_MAX_LEN: usize = 128;

/// Term index with document frequencies from the corpus it was built on.
///
/// Index 0 is padding and index 1 the unknown-term slot; neither can be
/// produced by the tokenizer, so they never collide with corpus terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyFile", into = "VocabularyFile")]
pub struct Vocabulary {
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    n_docs: usize,
}

impl From<VocabularyFile> for Vocabulary {
    fn from(f: VocabularyFile) -> Self {
        let index = f
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms: f.terms,
            document_frequency: f.document_frequency,
            n_docs: f.n_docs,
            index,
        }
    }
}

impl From<Vocabulary> for VocabularyFile {
    fn from(v: Vocabulary) -> Self {
        VocabularyFile {
            terms: v.terms,
            document_frequency: v.document_frequency,
            n_docs: v.n_docs,
        }
    }
}

impl Vocabulary {
    /// Keep terms with document frequency `>= min_df`, the `max_size` most
    /// frequent (ties broken lexicographically), indexed in that order after
    /// the two reserved slots.
    pub fn build<'a, I>(texts: I, min_df: usize, max_size: usize) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut n_docs = 0;
        for text in texts {
            n_docs += 1;
            let (_, tokens) = analyze(text);
            let mut seen: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
            seen.sort_unstable();
            seen.dedup();
            for term in seen {
                *df.entry(term.to_string()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> =
            df.into_iter().filter(|(_, n)| *n >= min_df).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size);

        let mut terms = vec![PAD_TERM.to_string(), UNK_TERM.to_string()];
        let mut document_frequency = vec![0, 0];
        for (t, n) in ranked {
            terms.push(t);
            document_frequency.push(n);
        }
        VocabularyFile {
            terms,
            document_frequency,
            n_docs,
        }
        .into()
    }

    pub fn from_corpus(corpus: &Corpus, min_df: usize, max_size: usize) -> Self {
        Self::build(corpus.iter().map(|i| i.text.as_str()), min_df, max_size)
    }

    /// Total size including the reserved slots.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.len() <= 2
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        match self.index.get(term) {
            Some(&i) if i > UNK => Some(i),
            _ => None,
        }
    }

    /// Index for sequence models: unknown terms map to [`UNK`].
    pub fn index_or_unk(&self, term: &str) -> usize {
        self.get(term).unwrap_or(UNK)
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency.get(index).copied().unwrap_or(0)
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Smoothed inverse document frequencies, `ln((1+N)/(1+df))`, zero for the
    /// reserved slots.
    pub fn idf<T: Scalar>(&self) -> Vec<T> {
        let n = T::from_count(self.n_docs);
        self.document_frequency
            .iter()
            .enumerate()
            .map(|(i, &df)| {
                if i <= UNK {
                    T::zero()
                } else {
                    ((T::one() + n) / (T::one() + T::from_count(df))).ln()
                }
            })
            .collect()
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector<T> {
    pub dim: usize,
    pub entries: Vec<(usize, T)>,
}

impl<T: Scalar> WeightedVector<T> {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot(&self, dense: &[T]) -> T {
        self.entries.iter().map(|&(i, w)| w * dense[i]).sum()
    }

    pub fn norm(&self) -> T {
        self.entries.iter().map(|&(_, w)| w * w).sum::<T>().sqrt()
    }
}

/// L2-normalized `tf * idf` over in-vocabulary tokens.
pub fn tfidf_vector<T: Scalar>(
    tokens: &[Token],
    vocab: &Vocabulary,
    idf: &[T],
) -> WeightedVector<T> {
    let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
    for t in tokens {
        if let Some(i) = vocab.get(&t.surface) {
            *tf.entry(i).or_default() += 1;
        }
    }
    let mut entries: Vec<(usize, T)> = tf
        .into_iter()
        .map(|(i, n)| (i, T::from_count(n) * idf[i]))
        .filter(|&(_, w)| w != T::zero())
        .collect();
    let norm = entries.iter().map(|&(_, w)| w * w).sum::<T>().sqrt();
    if norm > T::zero() {
        for e in entries.iter_mut() {
            e.1 /= norm;
        }
    }
    WeightedVector {
        dim: vocab.len(),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub indices: Vec<usize>,
    pub true_length: usize,
}

/// First `max_len` tokens as vocabulary indices, right-padded with [`PAD`].
pub fn token_sequence(tokens: &[Token], vocab: &Vocabulary, max_len: usize) -> TokenSequence {
    sequence_from_terms(
        tokens.iter().map(|t| Some(t.surface.as_str())),
        vocab,
        max_len,
    )
}

/// Like [`token_sequence`], but `None` entries become [`PAD`] in place.
pub fn sequence_from_terms<'a, I>(terms: I, vocab: &Vocabulary, max_len: usize) -> TokenSequence
where
    I: IntoIterator<Item = Option<&'a str>>,
{
    let mut indices: Vec<usize> = terms
        .into_iter()
        .take(max_len)
        .map(|t| t.map_or(PAD, |s| vocab.index_or_unk(s)))
        .collect();
    let true_length = indices.len();
    indices.resize(max_len, PAD);
    TokenSequence {
        indices,
        true_length,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn terms(v: &Vocabulary) -> Vec<&str> {
        (2..v.len()).map(|i| v.term(i).unwrap()).collect()
    }

    #[test]
    fn min_df_filters() {
        let v = Vocabulary::build(["a b", "a c"], 2, 100);
        assert_eq!(terms(&v), ["a"]);
        assert_eq!(v.term(PAD), Some(PAD_TERM));
        assert_eq!(v.term(UNK), Some(UNK_TERM));
        let all = Vocabulary::build(["a b", "a c"], 1, usize::MAX);
        assert_eq!(terms(&all), ["a", "b", "c"]);
    }

    #[test]
    fn truncation_tie_keeps_smaller_term() {
        let v = Vocabulary::build(["x zeta", "x alpha", "x mid"], 1, 2);
        assert_eq!(terms(&v), ["x", "alpha"]);
    }

    #[test]
    fn reserved_terms_are_not_lookups() {
        let v = Vocabulary::build(["pad unk"], 1, 10);
        assert_eq!(v.get(PAD_TERM), None);
        assert_eq!(v.get(UNK_TERM), None);
        assert!(v.get("pad").is_some());
    }

    #[test]
    fn tfidf_edge_cases() {
        let v = Vocabulary::build(["covid vaccine", "covid hoax"], 1, 100);
        let idf = v.idf::<f64>();
        let oov = tfidf_vector(&tokenize("unseen words only"), &v, &idf);
        assert!(oov.is_zero());
        let one = tfidf_vector(&tokenize("hoax"), &v, &idf);
        assert_eq!(one.entries.len(), 1);
        assert!((one.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tfidf_matches_hand_computed_toy_corpus() {
        // docs: "covid vaccine safe", "covid hoax hoax", "vaccine hoax claim"
        // df: covid 2, vaccine 2, hoax 2, safe 1, claim 1; N = 3
        // idf(df=2) = ln(4/3), idf(df=1) = ln(4/2)
        let v = Vocabulary::build(
            [
                "covid vaccine safe",
                "covid hoax hoax",
                "vaccine hoax claim",
            ],
            1,
            100,
        );
        let idf = v.idf::<f64>();
        assert!((idf[v.get("covid").unwrap()] - 0.28768207245178085).abs() < 1e-15);
        assert!((idf[v.get("safe").unwrap()] - std::f64::consts::LN_2).abs() < 1e-15);

        // "safe hoax hoax claim zzz": raw safe .693147, hoax 2*.287682, claim .693147
        let expected = [
            ("hoax", 0.5061974505226827),
            ("claim", 0.609821343134338),
            ("safe", 0.609821343134338),
        ];
        let vec = tfidf_vector(&tokenize("safe hoax hoax claim zzz"), &v, &idf);
        assert_eq!(vec.entries.len(), 3);
        for (term, w) in expected {
            let i = v.get(term).unwrap();
            let got = vec.entries.iter().find(|e| e.0 == i).unwrap().1;
            assert!((got - w).abs() < 1e-12, "{term}: {got} vs {w}");
        }
        assert!(vec.entries.windows(2).all(|p| p[0].0 < p[1].0));
    }

    #[test]
    fn idf_uses_only_the_vocabulary_corpus() {
        let train = ["covid vaccine", "covid hoax", "hoax claim"];
        let v1 = Vocabulary::build(train, 1, 100);
        let v2 = Vocabulary::build(train, 1, 100);
        // building a second time with a test set around changes nothing
        let _test_vocab = Vocabulary::build(["completely different words"], 1, 100);
        let t = tokenize("covid hoax claim");
        assert_eq!(
            tfidf_vector(&t, &v1, &v1.idf::<f64>()),
            tfidf_vector(&t, &v2, &v2.idf::<f64>())
        );
    }

    #[test]
    fn sequences_pad_truncate_and_unk() {
        let v = Vocabulary::build(["a b c d e"], 1, 100);
        let s = token_sequence(&tokenize("a b"), &v, 4);
        assert_eq!(s.indices[2..], [PAD, PAD]);
        assert_eq!(s.true_length, 2);
        let s = token_sequence(&tokenize("a b c d e"), &v, 3);
        assert_eq!(
            s.indices,
            vec![
                v.get("a").unwrap(),
                v.get("b").unwrap(),
                v.get("c").unwrap()
            ]
        );
        assert_eq!(s.true_length, 3);
        let s = token_sequence(&tokenize("zzz"), &v, 2);
        assert_eq!(s.indices, vec![UNK, PAD]);
    }

    #[test]
    fn vocabulary_serde_round_trip() {
        let v = Vocabulary::build(["a b", "b c"], 1, 100);
        let back: Vocabulary = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.get("b"), v.get("b"));
    }
}
