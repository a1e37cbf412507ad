//! Band rules and the notification feed.
//!
//! A rule watches one numeric attribute. The first sample outside its band
//! raises a notification; further out-of-band samples raise nothing until a
//! sample has come back inside.

use std::collections::BTreeMap;
use std::fmt;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::TwinError;
use crate::registry::{ItemId, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Alarm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Audience {
    Manager,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub item: ItemId,
    pub attr: String,
    pub band: [f64; 2],
    pub severity: Severity,
    #[serde(default = "default_audience")]
    pub audience: Audience,
}

fn default_audience() -> Audience {
    Audience::Manager
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRule {
    pub id: RuleId,
    #[serde(flatten)]
    pub spec: RuleSpec,
}

impl BandRule {
    pub fn contains(&self, v: f64) -> bool {
        let [lo, hi] = self.spec.band;
        lo <= v && v <= hi
    }

    pub fn describe(&self) -> String {
        let [lo, hi] = self.spec.band;
        format!("{} in [{lo}, {hi}]", self.spec.attr)
    }
}

impl fmt::Display for BandRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} on {}: {}", self.id.0, self.spec.item, self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub id: u64,
    pub item_id: ItemId,
    pub severity: Severity,
    /// What fired: a rule description or `alarm:<category>`.
    pub rule: String,
    pub rule_id: Option<RuleId>,
    pub raised_at: f64,
    pub acknowledged: bool,
    pub audience: Audience,
    pub message: String,
}

/// A rule whose attribute is currently outside its band.
#[derive(Debug, Clone, PartialEq)]
pub struct Breach {
    pub rule: BandRule,
    pub value: f64,
    pub since: f64,
}

#[derive(Default)]
struct Inner {
    rules: BTreeMap<RuleId, (BandRule, Option<(f64, f64)>)>,
    feed: Vec<Notification>,
    next_rule: u64,
}

#[derive(Default)]
pub struct NotificationCenter {
    inner: Mutex<Inner>,
}

impl NotificationCenter {
    pub fn new() -> Self {
        NotificationCenter::default()
    }

    pub fn register_rule(&self, registry: &Registry, spec: RuleSpec) -> Result<RuleId, TwinError> {
        let [lo, hi] = spec.band;
        if !(lo <= hi) {
            return Err(TwinError::BadRequest(format!("band [{lo}, {hi}] is empty")));
        }
        let numeric = registry.with_item(&spec.item, |r| r.custom_attrs.get(&spec.attr).map(|d| d.kind.is_numeric()))?;
        match numeric {
            None => {
                return Err(TwinError::UnknownAttribute {
                    item: spec.item.clone(),
                    attr: spec.attr.clone(),
                })
            }
            Some(false) => return Err(TwinError::BadRequest(format!("attribute `{}` is not numeric", spec.attr))),
            Some(true) => {}
        }
        let mut inner = self.inner.lock();
        inner.next_rule += 1;
        let id = RuleId(inner.next_rule);
        inner.rules.insert(id, (BandRule { id, spec }, None));
        Ok(id)
    }

    pub fn rules(&self) -> Vec<BandRule> {
        self.inner.lock().rules.values().map(|(r, _)| r.clone()).collect()
    }

    /// Applies freshly ingested values of `item` to its rules and returns
    /// the notifications raised.
    pub fn evaluate(&self, item: &ItemId, t: f64, updates: &[(String, f64)]) -> Vec<Notification> {
        let mut inner = self.inner.lock();
        let mut raised = Vec::new();
        let Inner { rules, feed, .. } = &mut *inner;
        for (rule, breach) in rules.values_mut() {
            if &rule.spec.item != item {
                continue;
            }
            for (attr, v) in updates {
                if attr != &rule.spec.attr {
                    continue;
                }
                if rule.contains(*v) {
                    *breach = None;
                } else if breach.is_none() {
                    *breach = Some((t, *v));
                    let n = Notification {
                        id: feed.len() as u64 + 1,
                        item_id: item.clone(),
                        severity: rule.spec.severity,
                        rule: rule.describe(),
                        rule_id: Some(rule.id),
                        raised_at: t,
                        acknowledged: false,
                        audience: rule.spec.audience,
                        message: format!("{} = {v} left [{}, {}]", attr, rule.spec.band[0], rule.spec.band[1]),
                    };
                    feed.push(n.clone());
                    raised.push(n);
                } else if let Some((_, last)) = breach.as_mut() {
                    *last = *v;
                }
            }
        }
        raised
    }

    /// Adds a notification that does not come from a band rule.
    pub fn raise(
        &self,
        item: &ItemId,
        severity: Severity,
        rule: impl Into<String>,
        t: f64,
        audience: Audience,
        message: impl Into<String>,
    ) -> Notification {
        let mut inner = self.inner.lock();
        let n = Notification {
            id: inner.feed.len() as u64 + 1,
            item_id: item.clone(),
            severity,
            rule: rule.into(),
            rule_id: None,
            raised_at: t,
            acknowledged: false,
            audience,
            message: message.into(),
        };
        inner.feed.push(n.clone());
        n
    }

    /// Notifications with id greater than `since`.
    pub fn since(&self, since: u64) -> Vec<Notification> {
        let inner = self.inner.lock();
        let start = (since as usize).min(inner.feed.len());
        inner.feed[start..].to_vec()
    }

    pub fn for_item(&self, item: &ItemId) -> Vec<Notification> {
        self.inner.lock().feed.iter().filter(|n| &n.item_id == item).cloned().collect()
    }

    /// Marks a notification acknowledged. Acknowledging twice is a no-op.
    pub fn ack(&self, id: u64) -> Result<Notification, TwinError> {
        let mut inner = self.inner.lock();
        let n = id
            .checked_sub(1)
            .and_then(|i| inner.feed.get_mut(i as usize))
            .ok_or(TwinError::UnknownNotification(id))?;
        n.acknowledged = true;
        Ok(n.clone())
    }

    pub fn breaches(&self, item: &ItemId) -> Vec<Breach> {
        self.inner
            .lock()
            .rules
            .values()
            .filter(|(r, _)| &r.spec.item == item)
            .filter_map(|(r, b)| {
                b.map(|(since, value)| Breach {
                    rule: r.clone(),
                    value,
                    since,
                })
            })
            .collect()
    }
}
