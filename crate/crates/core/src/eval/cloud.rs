//! Per-class term frequencies for word clouds.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::text::analyze;

const STOPWORDS_EN: &str = include_str!("../../../../resources/stopwords_en.txt");

/// The bundled English stopword list.
pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(STOPWORDS_EN)
}

/// One word per line; blank lines and `#` comments ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFrequencyCloud {
    pub label: Label,
    pub terms: Vec<(String, usize)>,
}

impl TermFrequencyCloud {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,count\n");
        for (t, c) in &self.terms {
            out.push_str(&format!("{t},{c}\n"));
        }
        out
    }
}

/// Most frequent non-stopword tokens across the texts of one class, ties
/// broken lexicographically.
pub fn term_cloud(
    corpus: &Corpus,
    label: Label,
    top_k: usize,
    stopwords: &HashSet<String>,
) -> TermFrequencyCloud {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for item in corpus.iter().filter(|i| i.label == label) {
        for t in analyze(&item.text).1 {
            if !stopwords.contains(&t.surface) {
                *counts.entry(t.surface).or_default() += 1;
            }
        }
    }
    let mut terms: Vec<(String, usize)> = counts.into_iter().collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    terms.truncate(top_k.max(1));
    TermFrequencyCloud { label, terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{NewsItem, Source};

    fn corpus(texts: &[&str], label: Label) -> Corpus {
        let items = texts
            .iter()
            .enumerate()
            .map(|(k, t)| NewsItem {
                id: k.to_string(),
                text: t.to_string(),
                label,
                source: Source::Other,
            })
            .collect();
        Corpus::new("c", items).unwrap()
    }

    #[test]
    fn counts_and_top_k() {
        let c = corpus(&["covid covid vaccine", "covid test"], Label::Real);
        let cloud = term_cloud(&c, Label::Real, 1, &HashSet::new());
        assert_eq!(cloud.terms, vec![("covid".to_string(), 3)]);
        assert!(term_cloud(&c, Label::Fake, 5, &HashSet::new())
            .terms
            .is_empty());
    }

    #[test]
    fn stopwords_are_removed() {
        let c = corpus(&["the of covid"], Label::Fake);
        let cloud = term_cloud(&c, Label::Fake, 10, &default_stopwords());
        assert_eq!(cloud.terms, vec![("covid".to_string(), 1)]);
    }

    #[test]
    fn ties_are_lexicographic_and_counts_non_increasing() {
        let c = corpus(&["b a c a b d"], Label::Fake);
        let cloud = term_cloud(&c, Label::Fake, 3, &HashSet::new());
        assert_eq!(
            cloud.terms,
            vec![("a".into(), 2), ("b".into(), 2), ("c".into(), 1)]
        );
        assert!(cloud.terms.windows(2).all(|w| w[0].1 >= w[1].1));
        assert_eq!(cloud.to_csv(), "term,count\na,2\nb,2\nc,1\n");
    }
}
