//! Inverted index with TF-IDF cosine ranking.
//!
//! Term weight in a document is `(1 + ln tf) · idf` with
//! `idf = ln(1 + N / df)`. A document's score is the cosine between its
//! weight vector and the query's (query tf counted the same way). The
//! `1 +` inside the idf keeps terms that occur in every document from
//! vanishing, so a term repeated in a short document still outranks a
//! single mention.

use std::collections::{BTreeMap, BTreeSet};

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn term_counts<'a>(tokens: impl IntoIterator<Item = &'a String>) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvertedIndex {
    /// token → postings `(doc_id, tf)`, sorted by doc id.
    postings: BTreeMap<String, Vec<(String, u32)>>,
    /// doc id → term counts (forward index, used for length normalization).
    docs: BTreeMap<String, BTreeMap<String, u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
}

impl InvertedIndex {
    pub fn new() -> Self {
        InvertedIndex::default()
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.docs.contains_key(doc_id)
    }

    /// Number of tokens in a document.
    pub fn doc_length(&self, doc_id: &str) -> Option<u32> {
        self.docs.get(doc_id).map(|c| c.values().sum())
    }

    pub fn postings(&self, token: &str) -> &[(String, u32)] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Adds a document. Returns `false` (and changes nothing) when the id is
    /// already present.
    pub fn insert(&mut self, doc_id: &str, text: &str) -> bool {
        if self.docs.contains_key(doc_id) {
            return false;
        }
        let counts = term_counts(&tokenize(text));
        for (token, tf) in &counts {
            let list = self.postings.entry(token.clone()).or_default();
            let pos = list.partition_point(|(d, _)| d.as_str() < doc_id);
            list.insert(pos, (doc_id.to_string(), *tf));
        }
        self.docs.insert(doc_id.to_string(), counts);
        true
    }

    pub fn remove(&mut self, doc_id: &str) -> bool {
        let Some(counts) = self.docs.remove(doc_id) else {
            return false;
        };
        for token in counts.keys() {
            if let Some(list) = self.postings.get_mut(token) {
                list.retain(|(d, _)| d != doc_id);
                if list.is_empty() {
                    self.postings.remove(token);
                }
            }
        }
        true
    }

    fn idf(&self, token: &str) -> f64 {
        let df = self.postings(token).len();
        if df == 0 {
            return 0.0;
        }
        (1.0 + self.docs.len() as f64 / df as f64).ln()
    }

    fn doc_norm(&self, doc_id: &str) -> f64 {
        self.docs[doc_id]
            .iter()
            .map(|(t, tf)| {
                let w = (1.0 + (*tf as f64).ln()) * self.idf(t);
                w * w
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Every document containing at least one query token, ranked by score
    /// descending with ties broken by doc id, truncated to `k`.
    pub fn search(&self, query: &str, k: usize) -> Vec<Hit> {
        let q = term_counts(&tokenize(query));
        let mut q_norm = 0.0;
        let mut dots: BTreeMap<&str, f64> = BTreeMap::new();
        for (token, qtf) in &q {
            let idf = self.idf(token);
            if idf == 0.0 {
                continue;
            }
            let qw = (1.0 + (*qtf as f64).ln()) * idf;
            q_norm += qw * qw;
            for (doc, tf) in self.postings(token) {
                let dw = (1.0 + (*tf as f64).ln()) * idf;
                *dots.entry(doc.as_str()).or_insert(0.0) += qw * dw;
            }
        }
        let q_norm = q_norm.sqrt();
        let mut hits: Vec<Hit> = dots
            .into_iter()
            .map(|(doc, dot)| {
                let norm = self.doc_norm(doc) * q_norm;
                Hit {
                    doc_id: doc.to_string(),
                    score: if norm > 0.0 { dot / norm } else { 0.0 },
                }
            })
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
        hits.truncate(k);
        hits
    }

    /// Docs containing every token of `query` (no ranking).
    pub fn matching_all(&self, query: &str) -> BTreeSet<String> {
        let tokens: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut iter = tokens.iter();
        let Some(first) = iter.next() else {
            return BTreeSet::new();
        };
        let mut set: BTreeSet<String> = self.postings(first).iter().map(|(d, _)| d.clone()).collect();
        for t in iter {
            let other: BTreeSet<&str> = self.postings(t).iter().map(|(d, _)| d.as_str()).collect();
            set.retain(|d| other.contains(d.as_str()));
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_lowercases_and_splits() {
        assert_eq!(tokenize("Fin-Tube 000X: Safety_switch!"), ["fin", "tube", "000x", "safety", "switch"]);
        assert!(tokenize("  ,;  ").is_empty());
    }

    #[test]
    fn hand_computed_scores() {
        let mut idx = InvertedIndex::new();
        idx.insert("d1", "a b");
        idx.insert("d2", "a a b");
        let hits = idx.search("a", 10);
        // d1: 1/√2. d2: (1 + ln 2) / √((1 + ln 2)² + 1). idf cancels.
        let d2 = (1.0 + 2f64.ln()) / ((1.0 + 2f64.ln()).powi(2) + 1.0).sqrt();
        assert_eq!(hits[0].doc_id, "d2");
        assert!((hits[0].score - d2).abs() < 1e-12);
        assert!((hits[0].score - 0.86104).abs() < 1e-5);
        assert!((hits[1].score - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn unknown_token_gives_nothing() {
        let mut idx = InvertedIndex::new();
        idx.insert("d1", "lubrication of the spindle");
        assert!(idx.search("zebra", 5).is_empty());
        assert!(idx.search("", 5).is_empty());
    }

    #[test]
    fn identical_docs_tie_by_id() {
        let mut idx = InvertedIndex::new();
        for id in ["c", "a", "b"] {
            idx.insert(id, "same words here");
        }
        let hits = idx.search("words", 10);
        let ids: Vec<_> = hits.iter().map(|h| h.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(hits.windows(2).all(|w| w[0].score == w[1].score));
    }

    #[test]
    fn remove_makes_doc_unfindable() {
        let mut idx = InvertedIndex::new();
        idx.insert("m", "machine manual lubrication");
        idx.insert("o", "other text");
        assert!(idx.remove("m"));
        assert!(idx.search("lubrication", 5).is_empty());
        assert!(idx.postings("manual").is_empty());
        assert!(!idx.remove("m"));
        assert_eq!(idx.doc_count(), 1);
    }

    #[test]
    fn duplicate_insert_is_refused() {
        let mut idx = InvertedIndex::new();
        assert!(idx.insert("d", "x"));
        assert!(!idx.insert("d", "y"));
        assert!(idx.search("y", 5).is_empty());
    }

    #[test]
    fn postings_stay_sorted() {
        let mut idx = InvertedIndex::new();
        for id in ["z", "m", "a", "q"] {
            idx.insert(id, "common");
        }
        let ids: Vec<_> = idx.postings("common").iter().map(|p| p.0.as_str()).collect();
        assert_eq!(ids, ["a", "m", "q", "z"]);
    }
}
