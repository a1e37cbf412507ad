//! Step-by-step operator procedures.
//!
//! Each (item, task) has at most one run in progress. Steps are confirmed in
//! order; confirming the last one ends the run and records a history entry
//! on the item.

use std::collections::BTreeMap;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::TwinError;
use crate::registry::{AttributeValue, ItemId, MediaRef, Origin, Registry, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcedureStep {
    pub instruction: String,
    #[serde(default)]
    pub media: Vec<MediaRef>,
    /// What the operator confirms, e.g. "plates mounted".
    #[serde(default)]
    pub confirm: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TutoringProcedure {
    pub item: ItemId,
    pub task: String,
    pub title: String,
    #[serde(rename = "step")]
    pub steps: Vec<ProcedureStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcedureView {
    #[serde(flatten)]
    pub procedure: TutoringProcedure,
    /// 1-based step awaiting confirmation.
    pub current_step: usize,
    pub completed_runs: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Advance {
    Next { step: usize, instruction: String },
    Done { completed_at: f64 },
}

#[derive(Default)]
struct Progress {
    next: usize,
    runs: u32,
}

#[derive(Default)]
pub struct Tutor {
    procedures: BTreeMap<(ItemId, String), TutoringProcedure>,
    progress: Mutex<BTreeMap<(ItemId, String), Progress>>,
}

impl Tutor {
    pub fn new(procedures: Vec<TutoringProcedure>) -> Result<Self, TwinError> {
        let mut map = BTreeMap::new();
        for p in procedures {
            if p.steps.is_empty() {
                return Err(TwinError::BadRequest(format!("procedure `{}` has no steps", p.task)));
            }
            let key = (p.item.clone(), p.task.clone());
            if map.insert(key, p).is_some() {
                return Err(TwinError::BadRequest("duplicate procedure".into()));
            }
        }
        Ok(Tutor {
            procedures: map,
            progress: Mutex::default(),
        })
    }

    pub fn tasks_for(&self, item: &ItemId) -> Vec<&TutoringProcedure> {
        self.procedures.values().filter(|p| &p.item == item).collect()
    }

    pub fn get_procedure(&self, item: &ItemId, task: &str) -> Result<ProcedureView, TwinError> {
        let p = self.lookup(item, task)?;
        let progress = self.progress.lock();
        let (next, runs) = progress
            .get(&(item.clone(), task.to_string()))
            .map_or((0, 0), |pr| (pr.next, pr.runs));
        Ok(ProcedureView {
            procedure: p.clone(),
            current_step: next + 1,
            completed_runs: runs,
        })
    }

    /// Confirms `step` (1-based). Only the current step may be confirmed.
    pub fn advance_step(
        &self,
        registry: &Registry,
        item: &ItemId,
        task: &str,
        step: usize,
        now: f64,
    ) -> Result<Advance, TwinError> {
        let p = self.lookup(item, task)?;
        let mut progress = self.progress.lock();
        let entry = progress.entry((item.clone(), task.to_string())).or_default();
        let expected = entry.next + 1;
        if step != expected {
            return Err(TwinError::OutOfOrderConfirmation { expected, got: step });
        }
        entry.next += 1;
        if entry.next < p.steps.len() {
            return Ok(Advance::Next {
                step: entry.next + 1,
                instruction: p.steps[entry.next].instruction.clone(),
            });
        }
        let t = registry.next_free_timestamp(item, Timestamp::new(now))?;
        let updates = BTreeMap::from([("last_procedure".to_string(), AttributeValue::Text(task.to_string()))]);
        registry.record_snapshot(item, t, Origin::ProcedureCompletion, updates)?;
        entry.next = 0;
        entry.runs += 1;
        Ok(Advance::Done {
            completed_at: t.minutes(),
        })
    }

    fn lookup(&self, item: &ItemId, task: &str) -> Result<&TutoringProcedure, TwinError> {
        self.procedures
            .get(&(item.clone(), task.to_string()))
            .ok_or_else(|| TwinError::UnknownTask {
                item: item.clone(),
                task: task.to_string(),
            })
    }
}
