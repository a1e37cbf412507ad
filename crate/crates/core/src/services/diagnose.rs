//! Machine status and diagnosis.
//!
//! Health comes from the rules currently breached and from component wear.
//! Each reason for a warning or fault also yields a fault hypothesis naming
//! the component, the attribute that gave it away and the rule involved.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rules::{Notification, Severity};
use super::{PlanState, Twin, TwinError};
use crate::registry::{ItemId, MediaRef, StateSnapshot, Timestamp};
use crate::sim::MachineSpec;

/// Wear above which a component is flagged.
pub const WEAR_WARNING: f64 = 0.8;
/// Wear above which the machine is reported faulty.
pub const WEAR_FAULT: f64 = 0.95;
pub const MANAGER_HISTORY: usize = 3;
pub const INLINE_HISTORY: usize = 50;
const UPCOMING_OPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    /// Summary for the maintenance manager.
    #[default]
    Manager,
    /// Detailed view for the operator at the machine.
    Inline,
}

impl FromStr for Depth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "manager" => Ok(Depth::Manager),
            "inline" => Ok(Depth::Inline),
            other => Err(format!("unknown depth `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Health {
    Nominal,
    Warning,
    Fault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultHypothesis {
    pub component: String,
    pub evidence: String,
    pub rule: String,
    pub severity: Health,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub plan_id: String,
    pub op_id: String,
    pub category: crate::MaintenanceCategory,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusReport {
    pub item_id: ItemId,
    pub name: String,
    pub category: String,
    pub description: String,
    pub depth: Depth,
    pub now: f64,
    pub current: StateSnapshot,
    pub health: Health,
    pub fault_hypotheses: Vec<FaultHypothesis>,
    pub most_worn: Option<(String, f64)>,
    pub scheduled_ops: Vec<ScheduledOp>,
    pub recent_history: Vec<StateSnapshot>,
    pub open_notifications: Vec<Notification>,
    /// Per numeric attribute, `(t, value)` over the history window. Inline
    /// depth only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_samples: Option<BTreeMap<String, Vec<(f64, f64)>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub media_refs: Option<Vec<MediaRef>>,
}

/// The component with the highest `wear:` value in `snap`; ties go to the
/// first name in order.
pub fn most_worn(snap: &StateSnapshot) -> Option<(String, f64)> {
    let mut best: Option<(String, f64)> = None;
    for (k, v) in &snap.values {
        let (Some(c), Some(w)) = (k.strip_prefix("wear:"), v.as_number()) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| w > *b) {
            best = Some((c.to_string(), w));
        }
    }
    best
}

fn hypothesis_component(spec: Option<&MachineSpec>, attr: &str, snap: &StateSnapshot) -> String {
    spec.and_then(|s| s.sensors.iter().find(|x| x.attr == attr))
        .and_then(|s| s.wear_component.clone())
        .or_else(|| most_worn(snap).map(|(c, _)| c))
        .unwrap_or_else(|| "unknown".to_string())
}

impl Twin {
    pub fn get_status(&self, id: &ItemId, depth: Depth) -> Result<StatusReport, TwinError> {
        let rec = self.registry.item(id)?;
        let current = rec.latest();
        let spec = self.machine_spec(id).ok();

        let mut hypotheses = Vec::new();
        for b in self.notifications.breaches(id) {
            let level = match b.rule.spec.severity {
                Severity::Alarm => Health::Fault,
                Severity::Warning => Health::Warning,
                Severity::Info => continue,
            };
            hypotheses.push(FaultHypothesis {
                component: hypothesis_component(spec.as_ref(), &b.rule.spec.attr, &current),
                evidence: b.rule.spec.attr.clone(),
                rule: b.rule.describe(),
                severity: level,
            });
        }
        for (k, v) in &current.values {
            let (Some(c), Some(w)) = (k.strip_prefix("wear:"), v.as_number()) else {
                continue;
            };
            let (level, limit) = if w >= WEAR_FAULT {
                (Health::Fault, WEAR_FAULT)
            } else if w >= WEAR_WARNING {
                (Health::Warning, WEAR_WARNING)
            } else {
                continue;
            };
            hypotheses.push(FaultHypothesis {
                component: c.to_string(),
                evidence: k.clone(),
                rule: format!("{k} >= {limit}"),
                severity: level,
            });
        }
        let health = hypotheses.iter().map(|h| h.severity).max().unwrap_or(Health::Nominal);

        let now = self.now();
        let mut scheduled_ops: Vec<ScheduledOp> = self
            .plans_for(id)
            .into_iter()
            .filter(|p| p.state != PlanState::Generated)
            .flat_map(|p| {
                let plan_id = p.plan.id.clone();
                p.plan.entries.into_iter().map(move |e| ScheduledOp {
                    plan_id: plan_id.clone(),
                    op_id: e.op_id,
                    category: e.category,
                    start: e.start,
                    end: e.end,
                })
            })
            .filter(|o| o.end > now)
            .collect();
        scheduled_ops.sort_by(|a, b| a.start.total_cmp(&b.start));
        scheduled_ops.truncate(UPCOMING_OPS);

        let window = match depth {
            Depth::Manager => MANAGER_HISTORY,
            Depth::Inline => INLINE_HISTORY,
        };
        let hist = &rec.state_history;
        let recent_history = hist[hist.len().saturating_sub(window)..].to_vec();
        let raw_samples = (depth == Depth::Inline).then(|| {
            let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
            for s in &recent_history {
                for (k, v) in &s.values {
                    if let Some(x) = v.as_number() {
                        series.entry(k.clone()).or_default().push((s.timestamp.minutes(), x));
                    }
                }
            }
            series
        });
        let open_notifications = self
            .notifications
            .for_item(id)
            .into_iter()
            .filter(|n| !n.acknowledged)
            .collect();
        Ok(StatusReport {
            item_id: rec.id.clone(),
            name: rec.name.clone(),
            category: rec.category.clone(),
            description: rec.description.clone(),
            depth,
            now,
            most_worn: most_worn(&current),
            current,
            health,
            fault_hypotheses: hypotheses,
            scheduled_ops,
            recent_history,
            open_notifications,
            raw_samples,
            media_refs: (depth == Depth::Inline).then(|| rec.media_refs.clone()),
        })
    }

    pub fn get_history(&self, id: &ItemId, from: f64, to: f64) -> Result<Vec<StateSnapshot>, TwinError> {
        if from > to {
            return Err(TwinError::BadRequest(format!("from {from} is after to {to}")));
        }
        Ok(self.registry.history(id, Timestamp::new(from), Timestamp::new(to))?)
    }
}
