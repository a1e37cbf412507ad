//! Keyword intent recognition for operator questions.
//!
//! Questions are tokenized like documents and matched against a fixed rule
//! table, checked in order; the first rule whose keywords are present wins.
//! Items are resolved by explicit id first, then by overlap with item names,
//! then by the caller's focus item (the one whose QR code was scanned).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::tokenize;
use crate::registry::ItemId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "intent", content = "arg", rename_all = "snake_case")]
pub enum Intent {
    MostWorn,
    NextMaintenance,
    NextBatch,
    Procedure,
    Alarms,
    History,
    Attribute(String),
    Status,
}

impl Intent {
    pub fn key(&self) -> &'static str {
        match self {
            Intent::MostWorn => "worn",
            Intent::NextMaintenance => "maintenance",
            Intent::NextBatch => "batch",
            Intent::Procedure => "procedure",
            Intent::Alarms => "alarms",
            Intent::History => "history",
            Intent::Attribute(_) => "attr",
            Intent::Status => "status",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuestion {
    pub intent: Option<Intent>,
    pub item: Option<ItemId>,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemAlias {
    pub id: ItemId,
    pub name: String,
    /// Custom attribute names of the item.
    pub attributes: Vec<String>,
}

/// Words too common in item names to identify one ("machine", "the", ...).
const NAME_STOPWORDS: &[&str] = &["machine", "the", "of", "a", "an", "line", "step"];

#[derive(Debug, Clone, Default)]
pub struct IntentMatcher {
    items: Vec<ItemAlias>,
}

impl IntentMatcher {
    pub fn new(items: Vec<ItemAlias>) -> Self {
        IntentMatcher { items }
    }

    pub fn items(&self) -> &[ItemAlias] {
        &self.items
    }

    pub fn parse(&self, question: &str, focus: Option<&ItemId>) -> ParsedQuestion {
        let tokens = tokenize(question);
        let set: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        let item = self.resolve_item(&tokens, &set).or_else(|| focus.cloned());
        let intent = self.match_intent(&tokens, &set, item.as_ref());
        ParsedQuestion { intent, item, tokens }
    }

    fn resolve_item(&self, tokens: &[String], set: &BTreeSet<&str>) -> Option<ItemId> {
        for t in tokens {
            if let Some(a) = self.items.iter().find(|a| a.id.as_str().eq_ignore_ascii_case(t)) {
                return Some(a.id.clone());
            }
        }
        let mut best: Option<(usize, &ItemAlias)> = None;
        let mut tie = false;
        for alias in &self.items {
            let overlap = tokenize(&alias.name)
                .iter()
                .filter(|w| !NAME_STOPWORDS.contains(&w.as_str()) && set.contains(w.as_str()))
                .count();
            if overlap == 0 {
                continue;
            }
            match best {
                Some((b, _)) if overlap < b => {}
                Some((b, _)) if overlap == b => tie = true,
                _ => {
                    best = Some((overlap, alias));
                    tie = false;
                }
            }
        }
        match best {
            Some((_, a)) if !tie => Some(a.id.clone()),
            _ => None,
        }
    }

    fn match_intent(&self, tokens: &[String], set: &BTreeSet<&str>, item: Option<&ItemId>) -> Option<Intent> {
        let any = |words: &[&str]| words.iter().any(|w| set.contains(w));
        if any(&["worn", "wear", "wearing", "replace", "replaced"]) && !any(&["how"]) {
            return Some(Intent::MostWorn);
        }
        if any(&["maintenance", "mwp"]) && any(&["next", "when", "scheduled", "due", "planned", "plan"]) {
            return Some(Intent::NextMaintenance);
        }
        if any(&["batch", "order"]) && any(&["next", "produce", "which"]) && !any(&["how"]) {
            return Some(Intent::NextBatch);
        }
        if any(&["how", "procedure", "steps", "instructions", "tutorial"]) {
            return Some(Intent::Procedure);
        }
        if any(&["alarm", "alarms", "notification", "notifications", "alert", "alerts", "warnings"]) {
            return Some(Intent::Alarms);
        }
        if any(&["history", "critical", "past", "previous", "recent"]) {
            return Some(Intent::History);
        }
        if let Some(attr) = self.match_attribute(tokens, item) {
            return Some(Intent::Attribute(attr));
        }
        if any(&["status", "state", "health", "condition", "working", "running", "ok", "fault", "faults"]) {
            return Some(Intent::Status);
        }
        None
    }

    /// Longest attribute name whose tokens all occur in the question.
    fn match_attribute(&self, tokens: &[String], item: Option<&ItemId>) -> Option<String> {
        let candidates = self
            .items
            .iter()
            .filter(|a| item.is_none_or(|id| &a.id == id))
            .flat_map(|a| a.attributes.iter());
        let mut best: Option<(usize, &String)> = None;
        for name in candidates {
            let words = tokenize(name);
            if words.is_empty() || !words.iter().all(|w| tokens.contains(w)) {
                continue;
            }
            if best.is_none_or(|(n, b)| words.len() > n || (words.len() == n && name < b)) {
                best = Some((words.len(), name));
            }
        }
        best.map(|(_, n)| n.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matcher() -> IntentMatcher {
        IntentMatcher::new(vec![
            ItemAlias {
                id: "000X".into(),
                name: "fin tube machine".into(),
                attributes: vec!["operating temperature".into(), "oscillation".into()],
            },
            ItemAlias {
                id: "000Y".into(),
                name: "milling machine".into(),
                attributes: vec!["tool thickness".into(), "operating temperature".into()],
            },
        ])
    }

    #[test]
    fn status_with_explicit_id() {
        let p = matcher().parse("What is the status of machine 000X?", None);
        assert_eq!(p.intent, Some(Intent::Status));
        assert_eq!(p.item, Some("000X".into()));
    }

    #[test]
    fn item_by_name_and_focus() {
        let m = matcher();
        assert_eq!(m.parse("most worn element of the milling machine", None).item, Some("000Y".into()));
        // "machine" alone is ambiguous, so the focus item is used.
        let p = m.parse("which is the most worn element of the machine", Some(&"000X".into()));
        assert_eq!((p.intent, p.item), (Some(Intent::MostWorn), Some("000X".into())));
        assert_eq!(m.parse("status please", None).item, None);
    }

    #[test]
    fn attribute_questions() {
        let m = matcher();
        let p = m.parse("current operating temperature of the fin tube", None);
        assert_eq!(p.intent, Some(Intent::Attribute("operating temperature".into())));
        let p = m.parse("tool thickness on 000X", None);
        assert_eq!(p.intent, None, "000X has no tool thickness attribute");
    }

    #[test]
    fn rule_order() {
        let m = matcher();
        assert_eq!(m.parse("when is the next maintenance of 000Y", None).intent, Some(Intent::NextMaintenance));
        assert_eq!(m.parse("which is the next batch to produce?", None).intent, Some(Intent::NextBatch));
        assert_eq!(
            m.parse("how to setup the printing machine for the next batch?", None).intent,
            Some(Intent::Procedure)
        );
        assert_eq!(m.parse("any alarms on 000X", None).intent, Some(Intent::Alarms));
        assert_eq!(m.parse("most critical operations in the past", None).intent, Some(Intent::History));
        assert_eq!(m.parse("xq zzv plorb", None).intent, None);
    }
}
