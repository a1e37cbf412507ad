//! Scoring the assistant against a corpus of operator questions.
//!
//! The corpus is a tab-separated file of `question<TAB>expected` lines, where
//! `expected` is an answer key (`doc:safety-ppe`) or key and value
//! (`worn:000X=hydraulic pump`). Lines starting with `#` are comments.

use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;
use twin_core::services::assistant::AskRequest;
use twin_core::services::Twin;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected `question<TAB>expected key`")]
    Malformed { line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Question {
    pub text: String,
    pub expected: String,
}

pub fn parse_corpus(src: &str) -> Result<Vec<Question>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('\t') {
            Some((q, e)) if !q.trim().is_empty() && !e.trim().is_empty() => out.push(Question {
                text: q.trim().to_string(),
                expected: e.trim().to_string(),
            }),
            _ => return Err(CorpusError::Malformed { line: i + 1 }),
        }
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Question>, CorpusError> {
    let src = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&src)
}

#[derive(Debug, Clone, Serialize)]
pub struct Miss {
    pub question: String,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub total: usize,
    pub correct: usize,
    pub mean_latency: f64,
    pub max_latency: f64,
    pub misses: Vec<Miss>,
}

/// Asks every question with no item in focus.
pub fn evaluate(twin: &Twin, corpus: &[Question]) -> Evaluation {
    let mut correct = 0;
    let mut latencies = Vec::with_capacity(corpus.len());
    let mut misses = Vec::new();
    for q in corpus {
        let a = twin.ask(&AskRequest {
            question: q.text.clone(),
            item: None,
        });
        latencies.push(a.latency);
        if a.matches(&q.expected) {
            correct += 1;
        } else {
            let got = match &a.value {
                Some(v) => format!("{}={v}", a.key),
                None => a.key.clone(),
            };
            misses.push(Miss {
                question: q.text.clone(),
                expected: q.expected.clone(),
                got,
            });
        }
    }
    let n = latencies.len().max(1) as f64;
    Evaluation {
        total: corpus.len(),
        correct,
        mean_latency: latencies.iter().sum::<f64>() / n,
        max_latency: latencies.iter().copied().fold(0.0, f64::max),
        misses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_missing_keys() {
        let qs = parse_corpus("# header\n\nstatus of 000X?\tstatus:000X\n").unwrap();
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].expected, "status:000X");
        assert!(matches!(
            parse_corpus("ok\tdoc:a\nno tab here\n"),
            Err(CorpusError::Malformed { line: 2 })
        ));
    }
}
