//! Applying what-if scenarios to the live twin.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mwp::{BusyWindow, ProductionSchedule};
use super::prognose::{prognose, Forecast, PrognosisScenario};
use super::{PlanState, Twin, TwinError};
use crate::registry::{AttributeValue, ItemId, Origin, Timestamp};
use crate::sim::dist::sub_seed;
use crate::sim::MaintenanceWindow;
use crate::Mode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioRequest {
    /// Put a generated work plan into effect.
    Mwp { plan_id: String },
    /// Change the machine's load.
    ProductionRate { machine: ItemId, load: f64 },
    /// Switch between baseline and twin-assisted operation.
    Mode { machine: ItemId, mode: Mode },
    /// Replace the machine's production schedule.
    Schedule { machine: ItemId, windows: Vec<BusyWindow> },
}

impl ScenarioRequest {
    fn label(&self) -> String {
        match self {
            ScenarioRequest::Mwp { plan_id } => format!("mwp:{plan_id}"),
            ScenarioRequest::ProductionRate { load, .. } => format!("production_rate:{load}"),
            ScenarioRequest::Mode { mode, .. } => format!("mode:{}", mode.as_str()),
            ScenarioRequest::Schedule { windows, .. } => format!("schedule:{}", windows.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedScenario {
    pub machine: ItemId,
    pub scenario: String,
    pub applied_at: f64,
}

impl Twin {
    pub fn execute_scenario(&self, req: &ScenarioRequest) -> Result<AppliedScenario, TwinError> {
        let machine = match req {
            ScenarioRequest::Mwp { plan_id } => self.execute_plan(plan_id)?,
            ScenarioRequest::ProductionRate { machine, load } => {
                self.with_machine(machine, |m| Ok(m.set_load(*load)?))?;
                machine.clone()
            }
            ScenarioRequest::Mode { machine, mode } => {
                self.with_machine(machine, |m| {
                    m.set_mode(*mode);
                    Ok(())
                })?;
                machine.clone()
            }
            ScenarioRequest::Schedule { machine, windows } => {
                self.set_schedule(machine, ProductionSchedule::new(windows.clone())?)?;
                machine.clone()
            }
        };
        let label = req.label();
        let t = self.registry.next_free_timestamp(&machine, Timestamp::new(self.now()))?;
        let updates = BTreeMap::from([("last_scenario".to_string(), AttributeValue::Text(label.clone()))]);
        self.registry
            .record_snapshot(&machine, t, Origin::ScenarioExecution, updates)?;
        Ok(AppliedScenario {
            machine,
            scenario: label,
            applied_at: t.minutes(),
        })
    }

    fn execute_plan(&self, plan_id: &str) -> Result<ItemId, TwinError> {
        let stored = self.plan(plan_id)?;
        if stored.state == PlanState::Executed {
            return Err(TwinError::Conflict(format!("plan `{plan_id}` was already executed")));
        }
        let report = self.feasibility(plan_id)?;
        if !report.feasible {
            return Err(TwinError::InfeasibleScenario {
                plan: plan_id.to_string(),
                conflicts: report.conflicts,
            });
        }
        let now = self.now();
        let windows: Vec<MaintenanceWindow> = stored
            .plan
            .entries
            .iter()
            .filter(|e| e.end > now)
            .map(|e| MaintenanceWindow {
                start: e.start,
                end: e.end,
                category: e.category,
                label: format!("{}#{}", e.op_id, e.occurrence),
            })
            .collect();
        self.with_machine(&stored.plan.machine, |m| {
            m.schedule_maintenance(windows);
            Ok(())
        })?;
        self.set_plan_state(plan_id, PlanState::Executed)?;
        Ok(stored.plan.machine)
    }

    /// Forecast for `machine` from its current state; the live twin is not
    /// modified.
    pub fn prognose_scenario(&self, machine: &ItemId, scenario: &PrognosisScenario) -> Result<Forecast, TwinError> {
        let spec = self.machine_spec(machine)?;
        let wear = self.wear_of(machine)?;
        let now = self.now();
        let seed = sub_seed(self.seed, &format!("prognose/{machine}/{now}"));
        prognose(&spec, &wear, now, scenario, seed)
    }
}
