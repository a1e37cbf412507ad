//! Full-text retrieval over item-linked documents (manuals, work plans,
//! procedures) and the keyword intent matcher used by the text assistant.

mod index;
pub mod intent;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::{ItemId, MediaRef};

pub use index::{tokenize, Hit, InvertedIndex};
pub use intent::{Intent, IntentMatcher, ItemAlias, ParsedQuestion};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("document `{0}` is already indexed")]
    DuplicateDoc(String),
    #[error("unknown document `{0}`")]
    UnknownDoc(String),
    #[error("document `{0}` has an empty body")]
    EmptyBody(String),
    #[error("{file}:{line}: {message}")]
    Corpus {
        file: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeDocument {
    pub doc_id: String,
    pub item_id: Option<ItemId>,
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub media_refs: Vec<MediaRef>,
}

impl KnowledgeDocument {
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>, body: impl Into<String>) -> Self {
        KnowledgeDocument {
            doc_id: doc_id.into(),
            item_id: None,
            title: title.into(),
            body: body.into(),
            media_refs: Vec::new(),
        }
    }

    pub fn for_item(mut self, item: impl Into<ItemId>) -> Self {
        self.item_id = Some(item.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: String,
    pub title: String,
    pub item_id: Option<ItemId>,
    pub score: f64,
    pub snippet: String,
}

#[derive(Default)]
struct State {
    index: InvertedIndex,
    docs: BTreeMap<String, KnowledgeDocument>,
}

/// Thread-safe document store. Searches take a read lock, so a search that
/// races an insert sees the index either before or after it.
#[derive(Default)]
pub struct KnowledgeBase {
    state: RwLock<State>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        KnowledgeBase::default()
    }

    pub fn index_document(&self, doc: KnowledgeDocument) -> Result<(), SearchError> {
        if doc.body.trim().is_empty() {
            return Err(SearchError::EmptyBody(doc.doc_id));
        }
        let mut st = self.state.write();
        if st.docs.contains_key(&doc.doc_id) {
            return Err(SearchError::DuplicateDoc(doc.doc_id));
        }
        let text = format!("{}\n{}", doc.title, doc.body);
        st.index.insert(&doc.doc_id, &text);
        st.docs.insert(doc.doc_id.clone(), doc);
        Ok(())
    }

    pub fn remove_document(&self, doc_id: &str) -> Result<KnowledgeDocument, SearchError> {
        let mut st = self.state.write();
        let doc = st
            .docs
            .remove(doc_id)
            .ok_or_else(|| SearchError::UnknownDoc(doc_id.to_string()))?;
        st.index.remove(doc_id);
        Ok(doc)
    }

    pub fn len(&self) -> usize {
        self.state.read().docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, doc_id: &str) -> Option<KnowledgeDocument> {
        self.state.read().docs.get(doc_id).cloned()
    }

    pub fn docs_for_item(&self, item: &ItemId) -> Vec<KnowledgeDocument> {
        self.state
            .read()
            .docs
            .values()
            .filter(|d| d.item_id.as_ref() == Some(item))
            .cloned()
            .collect()
    }

    pub fn search(&self, query: &str, k: usize) -> Vec<SearchHit> {
        let st = self.state.read();
        let terms = tokenize(query);
        st.index
            .search(query, k)
            .into_iter()
            .map(|h| {
                let doc = &st.docs[&h.doc_id];
                SearchHit {
                    snippet: snippet(&doc.body, &terms),
                    doc_id: h.doc_id,
                    title: doc.title.clone(),
                    item_id: doc.item_id.clone(),
                    score: h.score,
                }
            })
            .collect()
    }

    /// Loads `manifest.tsv` (`doc_id<TAB>item_id or -<TAB>title`) and one
    /// `<doc_id>.txt` body per entry from `dir`.
    pub fn load_corpus_dir(&self, dir: &Path) -> Result<usize, SearchError> {
        let manifest = dir.join("manifest.tsv");
        let text = fs::read_to_string(&manifest)?;
        let mut count = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| SearchError::Corpus {
                file: manifest.display().to_string(),
                line: i + 1,
                message,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            let [doc_id, item, title] = cols[..] else {
                return Err(err(format!("expected 3 tab-separated columns, got {}", cols.len())));
            };
            let body = fs::read_to_string(dir.join(format!("{doc_id}.txt")))
                .map_err(|e| err(format!("{doc_id}.txt: {e}")))?;
            let mut doc = KnowledgeDocument::new(doc_id, title, body);
            if item != "-" {
                doc = doc.for_item(item);
            }
            self.index_document(doc).map_err(|e| err(e.to_string()))?;
            count += 1;
        }
        Ok(count)
    }
}

/// First sentence of `body` that mentions one of `terms`, else the first
/// sentence.
fn snippet(body: &str, terms: &[String]) -> String {
    let sentences: Vec<&str> = body
        .split_inclusive(['.', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let hit = sentences
        .iter()
        .find(|s| {
            let toks = tokenize(s);
            terms.iter().any(|t| toks.contains(t))
        })
        .or(sentences.first());
    hit.map(|s| s.to_string()).unwrap_or_default()
}

/// One line of the evaluation corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalQuestion {
    pub question: String,
    pub expected: String,
}

/// Parses `question<TAB>expected-answer-key` lines; blank lines and `#`
/// comments are skipped.
pub fn parse_eval_corpus(text: &str) -> Result<Vec<EvalQuestion>, SearchError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('\t') {
            Some((q, e)) if !q.trim().is_empty() && !e.trim().is_empty() => out.push(EvalQuestion {
                question: q.trim().to_string(),
                expected: e.trim().to_string(),
            }),
            _ => {
                return Err(SearchError::Corpus {
                    file: "questions".into(),
                    line: i + 1,
                    message: "expected `question<TAB>expected-key`".into(),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        let kb = KnowledgeBase::new();
        kb.index_document(
            KnowledgeDocument::new(
                "manual-000X",
                "Fin tube machine manual",
                "General description.\nLubrication of the feed rollers every week. Check the safety switch.",
            )
            .for_item("000X"),
        )
        .unwrap();
        kb.index_document(KnowledgeDocument::new("plan", "Work plan", "Orders for the next week."))
            .unwrap();
        kb
    }

    #[test]
    fn manual_is_found_by_keyword() {
        let hits = kb().search("lubrication", 3);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, "manual-000X");
        assert_eq!(hits[0].item_id, Some(ItemId::from("000X")));
        assert!(hits[0].snippet.starts_with("Lubrication"));
    }

    #[test]
    fn title_is_indexed() {
        let hits = kb().search("manual", 3);
        assert_eq!(hits[0].doc_id, "manual-000X");
    }

    #[test]
    fn duplicate_and_unknown_ids() {
        let kb = kb();
        assert!(matches!(
            kb.index_document(KnowledgeDocument::new("plan", "x", "y")),
            Err(SearchError::DuplicateDoc(_))
        ));
        assert!(matches!(kb.remove_document("nope"), Err(SearchError::UnknownDoc(_))));
        assert!(matches!(
            kb.index_document(KnowledgeDocument::new("blank", "x", "  ")),
            Err(SearchError::EmptyBody(_))
        ));
    }

    #[test]
    fn remove_then_search() {
        let kb = kb();
        kb.remove_document("manual-000X").unwrap();
        assert!(kb.search("lubrication rollers", 5).is_empty());
        assert_eq!(kb.len(), 1);
        assert!(kb.docs_for_item(&"000X".into()).is_empty());
    }

    #[test]
    fn corpus_dir_loading() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("manifest.tsv"), "# id\titem\ttitle\na\t000X\tManual A\nb\t-\tGeneric\n").unwrap();
        fs::write(dir.path().join("a.txt"), "spindle lubrication").unwrap();
        fs::write(dir.path().join("b.txt"), "safety rules").unwrap();
        let kb = KnowledgeBase::new();
        assert_eq!(kb.load_corpus_dir(dir.path()).unwrap(), 2);
        assert_eq!(kb.get("a").unwrap().item_id, Some(ItemId::from("000X")));
        assert_eq!(kb.get("b").unwrap().item_id, None);

        fs::write(dir.path().join("manifest.tsv"), "c\tonly-two\n").unwrap();
        let err = KnowledgeBase::new().load_corpus_dir(dir.path()).unwrap_err();
        assert!(err.to_string().contains(":1:"), "{err}");
    }

    #[test]
    fn eval_corpus_parse() {
        let qs = parse_eval_corpus("# header\nwhat is up\tstatus:000X\n\n").unwrap();
        assert_eq!(qs, vec![EvalQuestion { question: "what is up".into(), expected: "status:000X".into() }]);
        assert!(parse_eval_corpus("no tab here").is_err());
    }
}
