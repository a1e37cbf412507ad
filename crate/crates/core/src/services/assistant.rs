//! Question answering for operators.
//!
//! A question with a recognised intent and item is answered from the twin's
//! live state. Anything else falls back to a search of the knowledge base.
//! Every answer carries a key (`intent:item`, `doc:<id>` or `none`) that
//! names what was answered, used by the evaluation corpus.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::diagnose::{most_worn, Depth};
use super::mwp::period_minutes;
use super::Twin;
use crate::registry::ItemId;
use crate::search::{tokenize, Intent, IntentMatcher, ItemAlias, SearchHit};

const DOC_HITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerKind {
    Direct,
    Document,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub kind: AnswerKind,
    pub key: String,
    /// The fact answered, e.g. the most worn component.
    pub value: Option<String>,
    pub text: String,
    pub confidence: f64,
    /// Wall-clock seconds spent answering.
    pub latency: f64,
    pub item: Option<ItemId>,
    pub documents: Vec<SearchHit>,
}

impl Answer {
    /// True if the answer matches an expected `key` or `key=value`.
    pub fn matches(&self, expected: &str) -> bool {
        match expected.split_once('=') {
            Some((k, v)) => self.key == k && self.value.as_deref().is_some_and(|x| x.eq_ignore_ascii_case(v)),
            None => self.key == expected,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AskRequest {
    pub question: String,
    /// Item whose QR code the operator scanned.
    #[serde(default)]
    pub item: Option<ItemId>,
}

struct Direct {
    value: Option<String>,
    text: String,
}

impl Twin {
    fn matcher(&self) -> IntentMatcher {
        let items = self
            .registry
            .item_ids()
            .into_iter()
            .filter_map(|id| {
                self.registry
                    .with_item(&id, |r| ItemAlias {
                        id: r.id.clone(),
                        name: r.name.clone(),
                        attributes: r.custom_attrs.keys().cloned().collect(),
                    })
                    .ok()
            })
            .collect();
        IntentMatcher::new(items)
    }

    pub fn ask(&self, req: &AskRequest) -> Answer {
        let clock = Instant::now();
        let matcher = self.matcher();
        let parsed = matcher.parse(&req.question, req.item.as_ref());
        let explicit = matcher.parse(&req.question, None).item.is_some();
        let mut answer = match (&parsed.intent, &parsed.item) {
            (Some(intent), Some(item)) => self.answer_direct(intent, item, &req.question).map(|d| Answer {
                kind: AnswerKind::Direct,
                key: direct_key(intent, item),
                value: d.value,
                text: d.text,
                confidence: if explicit { 0.9 } else { 0.75 },
                latency: 0.0,
                item: Some(item.clone()),
                documents: Vec::new(),
            }),
            _ => None,
        }
        .unwrap_or_else(|| self.answer_from_documents(&req.question, parsed.item));
        answer.latency = clock.elapsed().as_secs_f64();
        answer
    }

    fn answer_from_documents(&self, question: &str, item: Option<ItemId>) -> Answer {
        let hits = self.kb.search(question, DOC_HITS);
        match hits.first() {
            None => Answer {
                kind: AnswerKind::Document,
                key: "none".into(),
                value: None,
                text: "I could not find anything about that.".into(),
                confidence: 0.0,
                latency: 0.0,
                item,
                documents: Vec::new(),
            },
            Some(top) => Answer {
                kind: AnswerKind::Document,
                key: format!("doc:{}", top.doc_id),
                value: Some(top.doc_id.clone()),
                text: format!("{}: {}", top.title, top.snippet),
                confidence: (top.score * 0.8).clamp(0.0, 1.0),
                latency: 0.0,
                item,
                documents: hits,
            },
        }
    }

    fn answer_direct(&self, intent: &Intent, item: &ItemId, question: &str) -> Option<Direct> {
        let rec = self.registry.item(item).ok()?;
        let name = &rec.name;
        let now = self.now();
        Some(match intent {
            Intent::Status => {
                let s = self.get_status(item, Depth::Manager).ok()?;
                let health = serde_json::to_value(s.health).ok()?.as_str()?.to_string();
                let mut text = format!("{name} ({item}) is {health}");
                if let Some(h) = s.fault_hypotheses.first() {
                    text.push_str(&format!("; check the {} ({})", h.component, h.evidence));
                }
                Direct {
                    value: Some(health),
                    text: text + ".",
                }
            }
            Intent::MostWorn => {
                let (c, w) = most_worn(&rec.latest())?;
                Direct {
                    text: format!("The most worn element of the {name} is the {c} (wear {:.0}%).", w * 100.0),
                    value: Some(c),
                }
            }
            Intent::NextMaintenance => {
                let status = self.get_status(item, Depth::Manager).ok()?;
                if let Some(op) = status.scheduled_ops.first() {
                    Direct {
                        text: format!("Next maintenance on the {name}: {} at minute {:.0}.", op.op_id, op.start),
                        value: Some(op.op_id.clone()),
                    }
                } else {
                    let (op, due) = self
                        .standard_plan(item)?
                        .iter()
                        .map(|e| {
                            let p = period_minutes(e.periodicity);
                            (e.op_id.clone(), ((now / p).floor() + 1.0) * p)
                        })
                        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))?;
                    Direct {
                        text: format!("No plan is in effect; {op} is next due at minute {due:.0}."),
                        value: Some(op),
                    }
                }
            }
            Intent::NextBatch => {
                let schedule = self.schedule(item);
                match schedule.next_order(now) {
                    Some(w) => Direct {
                        text: format!("Next batch on the {name}: {} starting at minute {:.0}.", w.order, w.start),
                        value: Some(w.order.clone()),
                    },
                    None => Direct {
                        text: format!("No batch is scheduled on the {name}."),
                        value: None,
                    },
                }
            }
            Intent::Procedure => {
                let tokens = tokenize(question);
                let tasks = self.tutor.tasks_for(item);
                let best = tasks.iter().max_by_key(|p| {
                    let words = tokenize(&format!("{} {}", p.task, p.title));
                    (tokens.iter().filter(|t| words.contains(t)).count(), std::cmp::Reverse(p.task.clone()))
                })?;
                let steps: Vec<String> = best
                    .steps
                    .iter()
                    .enumerate()
                    .map(|(i, s)| format!("{}. {}", i + 1, s.instruction))
                    .collect();
                Direct {
                    text: format!("{}: {}", best.title, steps.join(" ")),
                    value: Some(best.task.clone()),
                }
            }
            Intent::Alarms => {
                let open: Vec<_> = self
                    .notifications
                    .for_item(item)
                    .into_iter()
                    .filter(|n| !n.acknowledged)
                    .collect();
                let text = match open.last() {
                    Some(n) => format!("{} open notification(s) on the {name}; latest: {}.", open.len(), n.message),
                    None => format!("No open notifications on the {name}."),
                };
                Direct {
                    value: Some(open.len().to_string()),
                    text,
                }
            }
            Intent::History => {
                let alarms = self.alarms_for(item);
                let notes = self.notifications.for_item(item);
                let last = rec
                    .state_history
                    .iter()
                    .rev()
                    .find(|s| s.origin != crate::registry::Origin::SensorIngest);
                let mut text = format!(
                    "The {name} had {} alarm(s) and {} notification(s).",
                    alarms.len(),
                    notes.len()
                );
                if let Some(s) = last {
                    text.push_str(&format!(" Last event: {} at minute {:.0}.", s.origin.as_str(), s.timestamp.minutes()));
                }
                Direct {
                    value: Some(alarms.len().to_string()),
                    text,
                }
            }
            Intent::Attribute(attr) => {
                let def = rec.custom_attrs.get(attr)?;
                let v = rec.latest().values.get(attr).cloned();
                let shown = match &v {
                    Some(crate::registry::AttributeValue::Number(x)) => format!("{x:.2} {}", def.unit).trim().to_string(),
                    Some(crate::registry::AttributeValue::Text(s)) => s.clone(),
                    Some(crate::registry::AttributeValue::Media(m)) => m.uri.clone(),
                    None => "not yet recorded".to_string(),
                };
                Direct {
                    text: format!("{attr} of the {name}: {shown}."),
                    value: Some(shown),
                }
            }
        })
    }
}

fn direct_key(intent: &Intent, item: &ItemId) -> String {
    match intent {
        Intent::Attribute(a) => format!("attr:{item}:{a}"),
        other => format!("{}:{item}", other.key()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::KnowledgeDocument;
    use crate::services::tests::twin;

    fn ask(t: &Twin, q: &str, item: Option<&str>) -> Answer {
        t.ask(&AskRequest {
            question: q.into(),
            item: item.map(ItemId::from),
        })
    }

    #[test]
    fn direct_answers() {
        let t = twin();
        t.advance(10.0).unwrap();
        let a = ask(&t, "Which is the most worn element of the fin tube machine?", None);
        assert!(a.matches("worn:000X=safety switch"), "{a:?}");
        assert_eq!(a.kind, AnswerKind::Direct);
        assert!(a.confidence > 0.8);
        let a = ask(&t, "what is the status?", Some("000X"));
        assert!(a.matches("status:000X=nominal"), "{a:?}");
        assert!(a.confidence < 0.8);
        let a = ask(&t, "how do I set up the printing machine", None);
        assert!(a.matches("procedure:S1=setup"), "{a:?}");
        let a = ask(&t, "when is the next maintenance of 000X", None);
        assert!(a.matches("maintenance:000X=grease"), "{a:?}");
        let a = ask(&t, "operating temperature of 000X?", None);
        assert!(a.key == "attr:000X:operating temperature", "{a:?}");
    }

    #[test]
    fn falls_back_to_documents() {
        let t = twin();
        t.knowledge_base()
            .index_document(KnowledgeDocument::new("lube", "Lubrication guide", "grease the bearings weekly"))
            .unwrap();
        let a = ask(&t, "bearings grease", None);
        assert!(a.matches("doc:lube"), "{a:?}");
        assert!((0.0..=1.0).contains(&a.confidence));
        let a = ask(&t, "zzqx qqqz", None);
        assert_eq!((a.key.as_str(), a.confidence), ("none", 0.0));
    }
}
