//! Twin services: the live plant model behind the service bus.
//!
//! [`Twin`] owns the registry, the simulated machines and the service state
//! (rules, notifications, work plans, procedures, knowledge base). Every
//! public operation is also reachable as a bus producer, see [`api`].

pub mod api;
pub mod assistant;
pub mod diagnose;
pub mod mwp;
pub mod prognose;
pub mod rules;
pub mod scenario;
pub mod tutoring;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bus::{ErrorKind, ServiceError};
use crate::config::ScenarioConfig;
use crate::registry::{AttributeKind, CustomAttributeDef, ItemId, Registry, RegistryError};
use crate::search::{KnowledgeBase, SearchError};
use crate::sim::dist::sub_seed;
use crate::sim::{wear_attr, AlarmEvent, MachineSim, MachineSpec, SimClock, SimError};
use crate::{MaintenanceCategory, Mode};

use mwp::{
    check_feasibility, generate_mwp, Conflict, FeasibilityReport, MaintenanceWorkPlan, MwpError, MwpRequest,
    PlanEntry, ProductionSchedule,
};
use rules::{Audience, Notification, NotificationCenter, Severity};
use tutoring::Tutor;

#[derive(Debug, Error)]
pub enum TwinError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mwp(#[from] MwpError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("unknown attribute `{attr}` on item `{item}`")]
    UnknownAttribute { item: ItemId, attr: String },
    #[error("item `{0}` is not a simulated machine")]
    UnknownMachine(ItemId),
    #[error("unknown notification {0}")]
    UnknownNotification(u64),
    #[error("unknown work plan `{0}`")]
    UnknownPlan(String),
    #[error("no procedure `{task}` for item `{item}`")]
    UnknownTask { item: ItemId, task: String },
    #[error("step {got} confirmed while step {expected} is pending")]
    OutOfOrderConfirmation { expected: usize, got: usize },
    #[error("scenario is infeasible: plan `{plan}` has {} conflict(s)", .conflicts.len())]
    InfeasibleScenario { plan: String, conflicts: Vec<Conflict> },
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    BadRequest(String),
}

impl TwinError {
    pub fn kind(&self) -> ErrorKind {
        use ErrorKind::*;
        match self {
            TwinError::Registry(e) => match e {
                RegistryError::UnknownItem(_) | RegistryError::UnknownAttribute { .. } => UnknownResource,
                RegistryError::DuplicateId(_)
                | RegistryError::DuplicateAttribute { .. }
                | RegistryError::NonMonotonicTimestamp { .. } => Conflict,
                _ => BadRequest,
            },
            TwinError::Sim(e) => match e {
                SimError::UnknownCategory(_) | SimError::UnknownComponent(_) | SimError::UnknownStream(_) => {
                    UnknownResource
                }
                SimError::Io(_) => ProducerFailure,
                _ => BadRequest,
            },
            TwinError::Mwp(MwpError::InfeasibleHorizon { .. }) => Conflict,
            TwinError::Mwp(_) => BadRequest,
            TwinError::Search(SearchError::UnknownDoc(_)) => UnknownResource,
            TwinError::Search(SearchError::DuplicateDoc(_)) => Conflict,
            TwinError::Search(_) => BadRequest,
            TwinError::UnknownAttribute { .. }
            | TwinError::UnknownMachine(_)
            | TwinError::UnknownNotification(_)
            | TwinError::UnknownPlan(_)
            | TwinError::UnknownTask { .. } => UnknownResource,
            TwinError::OutOfOrderConfirmation { .. } | TwinError::InfeasibleScenario { .. } | TwinError::Conflict(_) => {
                Conflict
            }
            TwinError::BadRequest(_) => BadRequest,
        }
    }
}

impl From<TwinError> for ServiceError {
    fn from(e: TwinError) -> Self {
        ServiceError::new(e.kind(), e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanState {
    Generated,
    Approved,
    Executed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredPlan {
    #[serde(flatten)]
    pub plan: MaintenanceWorkPlan,
    pub state: PlanState,
}

/// What happened during one [`Twin::advance`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdvanceReport {
    pub now: f64,
    pub frames: usize,
    pub notifications: Vec<Notification>,
    pub alarms: Vec<AlarmEvent>,
    pub produced_units: f64,
}

/// Knobs for [`Twin::generate_plan`]; missing fields come from the twin.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateRequest {
    pub machine: ItemId,
    #[serde(default)]
    pub horizon_start: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Replaces the machine's standard plan.
    #[serde(default)]
    pub plan: Option<Vec<PlanEntry>>,
    /// Replaces the machine's production schedule for this request.
    #[serde(default)]
    pub schedule: Option<ProductionSchedule>,
}

struct Plant {
    clock: SimClock,
    machines: BTreeMap<ItemId, MachineSim>,
}

pub struct Twin {
    registry: Registry,
    kb: KnowledgeBase,
    notifications: NotificationCenter,
    tutor: Tutor,
    plant: Mutex<Plant>,
    standard_plans: BTreeMap<ItemId, Vec<PlanEntry>>,
    schedules: RwLock<BTreeMap<ItemId, ProductionSchedule>>,
    plans: RwLock<BTreeMap<String, StoredPlan>>,
    plan_seq: AtomicU64,
    alarms: Mutex<Vec<AlarmEvent>>,
    seed: u64,
}

impl Twin {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Twin, TwinError> {
        let registry = Registry::new();
        for item in &cfg.items {
            item.install(&registry)?;
        }
        let mut machines = BTreeMap::new();
        for spec in &cfg.machines {
            install_machine(&registry, spec)?;
            let sim = MachineSim::new(spec.clone(), sub_seed(cfg.seed, &format!("machine/{}", spec.item)))?;
            machines.insert(spec.item.clone(), sim);
        }
        let notifications = NotificationCenter::new();
        for r in &cfg.rules {
            notifications.register_rule(&registry, r.clone())?;
        }
        let kb = KnowledgeBase::new();
        if let Some(dir) = cfg.docs_dir() {
            kb.load_corpus_dir(&dir)?;
        }
        let mut schedules = BTreeMap::new();
        for s in &cfg.schedules {
            schedules.insert(s.machine.clone(), s.schedule()?);
        }
        Ok(Twin {
            registry,
            kb,
            notifications,
            tutor: Tutor::new(cfg.procedures.clone())?,
            plant: Mutex::new(Plant {
                clock: SimClock::new(cfg.seed),
                machines,
            }),
            standard_plans: cfg.plans.iter().map(|p| (p.machine.clone(), p.entries.clone())).collect(),
            schedules: RwLock::new(schedules),
            plans: RwLock::default(),
            plan_seq: AtomicU64::new(0),
            alarms: Mutex::default(),
            seed: cfg.seed,
        })
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn knowledge_base(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn notifications(&self) -> &NotificationCenter {
        &self.notifications
    }

    pub fn tutor(&self) -> &Tutor {
        &self.tutor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn now(&self) -> f64 {
        self.plant.lock().clock.now()
    }

    pub fn machine_ids(&self) -> Vec<ItemId> {
        self.plant.lock().machines.keys().cloned().collect()
    }

    pub fn machine_spec(&self, id: &ItemId) -> Result<MachineSpec, TwinError> {
        self.with_machine(id, |m| Ok(m.spec().clone()))
    }

    /// Runs `f` on the live machine model.
    pub fn with_machine<R>(
        &self,
        id: &ItemId,
        f: impl FnOnce(&mut MachineSim) -> Result<R, TwinError>,
    ) -> Result<R, TwinError> {
        let mut plant = self.plant.lock();
        match plant.machines.get_mut(id) {
            Some(m) => f(m),
            None if self.registry.contains(id) => Err(TwinError::UnknownMachine(id.clone())),
            None => Err(RegistryError::UnknownItem(id.clone()).into()),
        }
    }

    /// Advances the plant clock by `dt` minutes: every machine is ticked,
    /// its frames ingested and the rules evaluated on the new values.
    pub fn advance(&self, dt: f64) -> Result<AdvanceReport, TwinError> {
        let mut plant = self.plant.lock();
        let Plant { clock, machines } = &mut *plant;
        let mut report = AdvanceReport::default();
        let mut outputs = Vec::with_capacity(machines.len());
        for sim in machines.values_mut() {
            outputs.push(sim.tick(dt)?);
        }
        report.now = clock.advance(dt)?;
        for out in outputs {
            for frame in &out.frames {
                for o in self.registry.ingest_frame(frame.t, &frame.samples)? {
                    report
                        .notifications
                        .extend(self.notifications.evaluate(&o.item, frame.t, &o.updates));
                }
                report.frames += 1;
            }
            for a in &out.alarms {
                report.notifications.push(self.alarm_notification(a));
            }
            report.alarms.extend(out.alarms);
            report.produced_units += out.produced_units;
        }
        self.alarms.lock().extend(report.alarms.iter().cloned());
        Ok(report)
    }

    fn alarm_notification(&self, a: &AlarmEvent) -> Notification {
        self.notifications.raise(
            &a.machine,
            Severity::Alarm,
            format!("alarm:{}", a.category),
            a.raised_at,
            Audience::Operator,
            format!("{} alarm, estimated fix {:.1} min", a.category, a.fix_time),
        )
    }

    /// Raises an alarm on `machine` now, as if the plant had reported it.
    pub fn inject_alarm(
        &self,
        machine: &ItemId,
        category: MaintenanceCategory,
        mode: Option<Mode>,
    ) -> Result<(AlarmEvent, Notification), TwinError> {
        let now = self.now();
        let mut event = self.with_machine(machine, |m| {
            let mode = mode.unwrap_or(m.mode());
            Ok(m.inject_alarm(category, mode)?)
        })?;
        event.raised_at = now;
        let n = self.alarm_notification(&event);
        self.alarms.lock().push(event.clone());
        Ok((event, n))
    }

    pub fn alarms_for(&self, machine: &ItemId) -> Vec<AlarmEvent> {
        self.alarms.lock().iter().filter(|a| &a.machine == machine).cloned().collect()
    }

    /// Current wear of each component, read from the twin's latest state.
    pub fn wear_of(&self, machine: &ItemId) -> Result<Vec<(String, f64)>, TwinError> {
        let spec = self.machine_spec(machine)?;
        let snap = self.registry.latest(machine)?;
        Ok(spec
            .components
            .iter()
            .map(|c| {
                let w = snap.number(&wear_attr(&c.name)).unwrap_or(c.initial_wear);
                (c.name.clone(), w)
            })
            .collect())
    }

    pub fn standard_plan(&self, machine: &ItemId) -> Option<&[PlanEntry]> {
        self.standard_plans.get(machine).map(Vec::as_slice)
    }

    pub fn schedule(&self, machine: &ItemId) -> ProductionSchedule {
        self.schedules.read().get(machine).cloned().unwrap_or_default()
    }

    pub fn set_schedule(&self, machine: &ItemId, schedule: ProductionSchedule) -> Result<(), TwinError> {
        self.machine_spec(machine)?;
        self.schedules.write().insert(machine.clone(), schedule);
        Ok(())
    }

    pub fn generate_plan(&self, req: &GenerateRequest) -> Result<StoredPlan, TwinError> {
        let spec = self.machine_spec(&req.machine)?;
        let entries = match (&req.plan, self.standard_plan(&spec.item)) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => p.to_vec(),
            (None, None) => return Err(TwinError::BadRequest(format!("no standard plan for `{}`", spec.item))),
        };
        let schedule = match &req.schedule {
            Some(s) => ProductionSchedule::new(s.windows.clone())?,
            None => self.schedule(&req.machine),
        };
        let now = self.now();
        let horizon = match req.horizon {
            Some(h) => h,
            None => entries
                .iter()
                .map(|e| mwp::period_minutes(e.periodicity))
                .fold(0.0, f64::max),
        };
        let mreq = MwpRequest {
            machine: req.machine.clone(),
            horizon_start: req.horizon_start.unwrap_or(now),
            horizon,
        };
        let id = format!("mwp-{}", self.plan_seq.fetch_add(1, Ordering::SeqCst) + 1);
        let plan = generate_mwp(id.clone(), &mreq, &entries, &schedule, now)?;
        let stored = StoredPlan {
            plan,
            state: PlanState::Generated,
        };
        self.plans.write().insert(id, stored.clone());
        Ok(stored)
    }

    pub fn plan(&self, id: &str) -> Result<StoredPlan, TwinError> {
        self.plans
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| TwinError::UnknownPlan(id.to_string()))
    }

    pub fn plans_for(&self, machine: &ItemId) -> Vec<StoredPlan> {
        self.plans
            .read()
            .values()
            .filter(|p| &p.plan.machine == machine)
            .cloned()
            .collect()
    }

    /// Checks a stored plan against the machine's current production
    /// schedule.
    pub fn feasibility(&self, id: &str) -> Result<FeasibilityReport, TwinError> {
        let p = self.plan(id)?;
        Ok(check_feasibility(&p.plan, &self.schedule(&p.plan.machine)))
    }

    pub fn approve_plan(&self, id: &str) -> Result<StoredPlan, TwinError> {
        let report = self.feasibility(id)?;
        if !report.feasible {
            return Err(TwinError::InfeasibleScenario {
                plan: id.to_string(),
                conflicts: report.conflicts,
            });
        }
        self.set_plan_state(id, PlanState::Approved)
    }

    fn set_plan_state(&self, id: &str, state: PlanState) -> Result<StoredPlan, TwinError> {
        let mut plans = self.plans.write();
        let p = plans.get_mut(id).ok_or_else(|| TwinError::UnknownPlan(id.to_string()))?;
        p.state = state;
        Ok(p.clone())
    }
}

/// Defines the sensor and wear attributes of a simulated machine on its
/// item, bound to the machine's streams.
fn install_machine(registry: &Registry, spec: &MachineSpec) -> Result<(), TwinError> {
    let existing = registry.with_item(&spec.item, |r| r.custom_attrs.clone())?;
    for s in &spec.sensors {
        match existing.get(&s.attr) {
            Some(def) if def.kind.is_numeric() => registry.bind_stream(&spec.item, &s.attr, s.stream.clone())?,
            Some(_) => {
                return Err(TwinError::BadRequest(format!(
                    "attribute `{}` of `{}` is not numeric",
                    s.attr, spec.item
                )))
            }
            None => registry.define_custom_attribute(
                &spec.item,
                CustomAttributeDef::new(&s.attr, AttributeKind::Double, &s.unit).bound_to(s.stream.clone()),
            )?,
        }
    }
    for c in &spec.components {
        registry.define_custom_attribute(
            &spec.item,
            CustomAttributeDef::new(wear_attr(&c.name), AttributeKind::Double, "").bound_to(spec.wear_stream(&c.name)),
        )?;
    }
    Ok(())
}
