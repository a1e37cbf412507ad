//! Maintenance work plans.
//!
//! A standard plan lists preventive operations with a periodicity. Over a
//! horizon, occurrence `k` of an operation with period `P` is released at
//! `start + k·P` and must finish before `start + (k+1)·P`. Occurrences are
//! placed in the idle gaps of the production schedule, earliest deadline
//! first. When the greedy pass leaves something unplaced and the problem is
//! small, an exact search over subsets decides feasibility.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economics::{to_f64, MwpCostRow, Periodicity};
use crate::registry::ItemId;
use crate::sim::YEAR_MINUTES;
use crate::MaintenanceCategory;

/// Largest occurrence count handed to the exact search.
pub const EXACT_LIMIT: usize = 16;
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MwpError {
    #[error("horizon of {horizon} min is shorter than one {periodicity} period")]
    HorizonTooShort { horizon: f64, periodicity: &'static str },
    #[error("no feasible placement within the horizon; unplaced: {}", .unplaced.join(", "))]
    InfeasibleHorizon { unplaced: Vec<String> },
    #[error("invalid production schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid plan entry `{0}`")]
    InvalidEntry(String),
}

pub fn period_minutes(p: Periodicity) -> f64 {
    YEAR_MINUTES / p.per_year() as f64
}

/// One preventive operation of a standard plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntry {
    pub op_id: String,
    pub category: MaintenanceCategory,
    pub periodicity: Periodicity,
    /// Minutes per occurrence.
    pub duration: f64,
}

/// Standard plan with one operation per non-zero cell of a cost table.
pub fn standard_plan_from_rows(rows: &[MwpCostRow]) -> Vec<PlanEntry> {
    let mut out = Vec::new();
    for row in rows {
        for p in Periodicity::ALL {
            let m = to_f64(row.minutes_for(p));
            if m > 0.0 {
                out.push(PlanEntry {
                    op_id: format!("{}-{}", row.category, p.as_str()),
                    category: row.category,
                    periodicity: p,
                    duration: m,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusyWindow {
    pub start: f64,
    pub end: f64,
    #[serde(default)]
    pub order: String,
    #[serde(default = "full_load")]
    pub load: f64,
}

fn full_load() -> f64 {
    1.0
}

/// Production orders occupying a machine.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProductionSchedule {
    #[serde(default, rename = "window")]
    pub windows: Vec<BusyWindow>,
}

impl ProductionSchedule {
    pub fn new(mut windows: Vec<BusyWindow>) -> Result<Self, MwpError> {
        for w in &windows {
            if !(w.start.is_finite() && w.end.is_finite() && w.start < w.end) {
                return Err(MwpError::InvalidSchedule(format!("window [{}, {}]", w.start, w.end)));
            }
            if !(0.0..=1.0).contains(&w.load) {
                return Err(MwpError::InvalidSchedule(format!("load {} outside [0, 1]", w.load)));
            }
        }
        windows.sort_by(|a, b| a.start.total_cmp(&b.start));
        Ok(ProductionSchedule { windows })
    }

    /// Gaps of `[from, to)` not covered by any busy window.
    pub fn idle_windows(&self, from: f64, to: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut cursor = from;
        for w in &self.windows {
            if w.end <= cursor {
                continue;
            }
            if w.start >= to {
                break;
            }
            if w.start > cursor {
                out.push((cursor, w.start));
            }
            cursor = cursor.max(w.end);
        }
        if cursor < to {
            out.push((cursor, to));
        }
        out
    }

    /// The first order starting at or after `t`.
    pub fn next_order(&self, t: f64) -> Option<&BusyWindow> {
        self.windows.iter().find(|w| w.start >= t)
    }
}

/// One occurrence of an operation that has to be placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occurrence {
    pub op_id: String,
    pub occurrence: u32,
    pub category: MaintenanceCategory,
    pub periodicity: Periodicity,
    pub duration: f64,
    pub release: f64,
    pub deadline: f64,
}

impl Occurrence {
    pub fn label(&self) -> String {
        format!("{}#{}", self.op_id, self.occurrence)
    }
}

pub fn occurrences(plan: &[PlanEntry], start: f64, horizon: f64) -> Result<Vec<Occurrence>, MwpError> {
    let mut out = Vec::new();
    for e in plan {
        if !(e.duration > 0.0 && e.duration.is_finite()) || e.op_id.is_empty() {
            return Err(MwpError::InvalidEntry(e.op_id.clone()));
        }
        let period = period_minutes(e.periodicity);
        if horizon + EPS < period {
            return Err(MwpError::HorizonTooShort {
                horizon,
                periodicity: e.periodicity.as_str(),
            });
        }
        let count = ((horizon + EPS) / period).floor() as u32;
        for k in 0..count {
            let release = start + k as f64 * period;
            out.push(Occurrence {
                op_id: e.op_id.clone(),
                occurrence: k + 1,
                category: e.category,
                periodicity: e.periodicity,
                duration: e.duration,
                release,
                deadline: release + period,
            });
        }
    }
    Ok(out)
}

/// A placed occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwpEntry {
    pub op_id: String,
    pub occurrence: u32,
    pub category: MaintenanceCategory,
    pub periodicity: Periodicity,
    pub duration: f64,
    pub start: f64,
    pub end: f64,
}

impl MwpEntry {
    fn placed(o: &Occurrence, start: f64) -> Self {
        MwpEntry {
            op_id: o.op_id.clone(),
            occurrence: o.occurrence,
            category: o.category,
            periodicity: o.periodicity,
            duration: o.duration,
            start,
            end: start + o.duration,
        }
    }
}

/// Earliest start `>= not_before` for `o` inside one of `free`, finishing by
/// its deadline.
fn earliest_fit(o: &Occurrence, free: &[(f64, f64)], not_before: f64) -> Option<(usize, f64)> {
    let lo = not_before.max(o.release);
    for (i, &(a, b)) in free.iter().enumerate() {
        let s = a.max(lo);
        if s + o.duration > o.deadline + EPS {
            // Free gaps are sorted, later ones only start later.
            if a >= o.deadline {
                return None;
            }
            continue;
        }
        if s + o.duration <= b + EPS {
            return Some((i, s));
        }
    }
    None
}

/// Earliest-deadline-first placement into `idle`. Returns the placed
/// entries and the occurrences that did not fit.
pub fn greedy(occs: &[Occurrence], idle: &[(f64, f64)]) -> (Vec<MwpEntry>, Vec<Occurrence>) {
    let mut order: Vec<&Occurrence> = occs.iter().collect();
    order.sort_by(|a, b| {
        a.deadline
            .total_cmp(&b.deadline)
            .then(a.release.total_cmp(&b.release))
            .then_with(|| a.op_id.cmp(&b.op_id))
            .then(a.occurrence.cmp(&b.occurrence))
    });
    let mut free = idle.to_vec();
    let mut placed = Vec::new();
    let mut left = Vec::new();
    for o in order {
        match earliest_fit(o, &free, f64::NEG_INFINITY) {
            Some((i, s)) => {
                let (a, b) = free[i];
                let e = s + o.duration;
                let mut repl = Vec::with_capacity(2);
                if s - a > EPS {
                    repl.push((a, s));
                }
                if b - e > EPS {
                    repl.push((e, b));
                }
                free.splice(i..=i, repl);
                placed.push(MwpEntry::placed(o, s));
            }
            None => left.push(o.clone()),
        }
    }
    (placed, left)
}

/// Exact feasibility over all processing orders, via dynamic programming
/// on subsets: `f[S]` is the earliest time at which every occurrence in `S`
/// can be finished when they are processed back to back, each as early as
/// the idle windows allow. Panics if more than [`EXACT_LIMIT`] occurrences
/// are given.
pub fn exact(occs: &[Occurrence], idle: &[(f64, f64)]) -> Option<Vec<MwpEntry>> {
    let n = occs.len();
    assert!(n <= EXACT_LIMIT, "exact search is limited to {EXACT_LIMIT} occurrences");
    let full = (1usize << n) - 1;
    let mut finish = vec![f64::INFINITY; 1 << n];
    let mut prev: Vec<(usize, f64)> = vec![(usize::MAX, 0.0); 1 << n];
    finish[0] = f64::NEG_INFINITY;
    for set in 0..=full {
        let t = finish[set];
        if t == f64::INFINITY {
            continue;
        }
        for (j, o) in occs.iter().enumerate() {
            if set & (1 << j) != 0 {
                continue;
            }
            if let Some((_, s)) = earliest_fit(o, idle, t) {
                let next = set | (1 << j);
                let e = s + o.duration;
                if e < finish[next] {
                    finish[next] = e;
                    prev[next] = (j, s);
                }
            }
        }
    }
    if finish[full] == f64::INFINITY {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let mut set = full;
    while set != 0 {
        let (j, s) = prev[set];
        out.push(MwpEntry::placed(&occs[j], s));
        set &= !(1 << j);
    }
    out.reverse();
    Some(out)
}

/// Places every occurrence, falling back to the exact search when greedy
/// fails on a small instance. On failure returns the unplaced occurrences.
pub fn schedule_occurrences(occs: &[Occurrence], idle: &[(f64, f64)]) -> Result<Vec<MwpEntry>, Vec<Occurrence>> {
    let (mut placed, left) = greedy(occs, idle);
    if left.is_empty() {
        placed.sort_by(|a, b| a.start.total_cmp(&b.start));
        return Ok(placed);
    }
    if occs.len() <= EXACT_LIMIT {
        if let Some(mut entries) = exact(occs, idle) {
            entries.sort_by(|a, b| a.start.total_cmp(&b.start));
            return Ok(entries);
        }
    }
    Err(left)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaintenanceWorkPlan {
    pub id: String,
    pub machine: ItemId,
    pub horizon_start: f64,
    pub horizon_end: f64,
    pub entries: Vec<MwpEntry>,
    /// Simulation time at which the plan was made.
    pub generated_at: f64,
    /// Wall-clock seconds spent generating it.
    pub generation_time: f64,
}

impl MaintenanceWorkPlan {
    pub fn total_minutes(&self) -> f64 {
        self.entries.iter().map(|e| e.duration).sum()
    }

    pub fn minutes_by_category(&self) -> BTreeMap<MaintenanceCategory, f64> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.category).or_insert(0.0) += e.duration;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwpRequest {
    pub machine: ItemId,
    pub horizon_start: f64,
    pub horizon: f64,
}

pub fn generate_mwp(
    id: impl Into<String>,
    req: &MwpRequest,
    plan: &[PlanEntry],
    schedule: &ProductionSchedule,
    generated_at: f64,
) -> Result<MaintenanceWorkPlan, MwpError> {
    let clock = Instant::now();
    let occs = occurrences(plan, req.horizon_start, req.horizon)?;
    let end = req.horizon_start + req.horizon;
    let idle = schedule.idle_windows(req.horizon_start, end);
    let entries = schedule_occurrences(&occs, &idle).map_err(|left| MwpError::InfeasibleHorizon {
        unplaced: left.iter().map(Occurrence::label).collect(),
    })?;
    Ok(MaintenanceWorkPlan {
        id: id.into(),
        machine: req.machine.clone(),
        horizon_start: req.horizon_start,
        horizon_end: end,
        entries,
        generated_at,
        generation_time: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub op_id: String,
    pub occurrence: u32,
    pub start: f64,
    pub end: f64,
    pub order: String,
    pub busy_start: f64,
    pub busy_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub plan_id: String,
    pub feasible: bool,
    pub conflicts: Vec<Conflict>,
    /// Entries overlapping each other.
    pub self_overlaps: Vec<(String, String)>,
}

/// Checks a plan against a production schedule: no entry may overlap a busy
/// window or another entry.
pub fn check_feasibility(plan: &MaintenanceWorkPlan, schedule: &ProductionSchedule) -> FeasibilityReport {
    let mut conflicts = Vec::new();
    for e in &plan.entries {
        for w in &schedule.windows {
            if e.start < w.end - EPS && w.start < e.end - EPS {
                conflicts.push(Conflict {
                    op_id: e.op_id.clone(),
                    occurrence: e.occurrence,
                    start: e.start,
                    end: e.end,
                    order: w.order.clone(),
                    busy_start: w.start,
                    busy_end: w.end,
                });
            }
        }
    }
    let mut sorted: Vec<&MwpEntry> = plan.entries.iter().collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut self_overlaps = Vec::new();
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end - EPS {
            self_overlaps.push((
                format!("{}#{}", pair[0].op_id, pair[0].occurrence),
                format!("{}#{}", pair[1].op_id, pair[1].occurrence),
            ));
        }
    }
    FeasibilityReport {
        plan_id: plan.id.clone(),
        feasible: conflicts.is_empty() && self_overlaps.is_empty(),
        conflicts,
        self_overlaps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_data::fin_tube_maintenance;
    use crate::economics::annualize;

    const DAY: f64 = 1440.0;
    const WEEK: f64 = 7.0 * DAY;

    fn req(horizon: f64) -> MwpRequest {
        MwpRequest {
            machine: "000X".into(),
            horizon_start: 0.0,
            horizon,
        }
    }

    fn weekly(op: &str, duration: f64) -> PlanEntry {
        PlanEntry {
            op_id: op.into(),
            category: MaintenanceCategory::Mechanical,
            periodicity: Periodicity::Weekly,
            duration,
        }
    }

    #[test]
    fn one_year_plan_matches_annualized_minutes() {
        let table = fin_tube_maintenance();
        let plan = standard_plan_from_rows(&table.0.preventive);
        let mwp = generate_mwp("p1", &req(YEAR_MINUTES), &plan, &ProductionSchedule::default(), 0.0).unwrap();
        let want = to_f64(annualize(&table.0.preventive));
        assert!((mwp.total_minutes() - want).abs() < 1e-6, "{} vs {want}", mwp.total_minutes());
        assert!(check_feasibility(&mwp, &ProductionSchedule::default()).feasible);
        for e in &mwp.entries {
            let period = period_minutes(e.periodicity);
            let release = (e.occurrence - 1) as f64 * period;
            assert!(e.start >= release - 1e-9 && e.end <= release + period + 1e-9);
        }
    }

    #[test]
    fn idle_windows_complement_busy() {
        let s = ProductionSchedule::new(vec![
            BusyWindow {
                start: 10.0,
                end: 20.0,
                order: "a".into(),
                load: 1.0,
            },
            BusyWindow {
                start: 15.0,
                end: 30.0,
                order: "b".into(),
                load: 1.0,
            },
            BusyWindow {
                start: 40.0,
                end: 50.0,
                order: "c".into(),
                load: 1.0,
            },
        ])
        .unwrap();
        assert_eq!(s.idle_windows(0.0, 45.0), vec![(0.0, 10.0), (30.0, 40.0)]);
        assert_eq!(s.idle_windows(12.0, 100.0), vec![(30.0, 40.0), (50.0, 100.0)]);
        assert_eq!(s.next_order(11.0).unwrap().order, "b");
    }

    #[test]
    fn seventy_operations_do_not_fit_a_busy_week() {
        let plan: Vec<PlanEntry> = (0..70).map(|i| weekly(&format!("op{i:02}"), 0.1 * DAY)).collect();
        let busy = ProductionSchedule::new(vec![BusyWindow {
            start: 0.0,
            end: WEEK,
            order: "ORD-1".into(),
            load: 1.0,
        }])
        .unwrap();
        match generate_mwp("p", &req(WEEK), &plan, &busy, 0.0) {
            Err(MwpError::InfeasibleHorizon { unplaced }) => assert_eq!(unplaced.len(), 70),
            other => panic!("{other:?}"),
        }
        let free = generate_mwp("p", &req(WEEK), &plan, &ProductionSchedule::default(), 0.0).unwrap();
        let report = check_feasibility(&free, &busy);
        assert!(!report.feasible);
        assert_eq!(report.conflicts.len(), 70);
    }

    #[test]
    fn horizon_must_cover_every_periodicity() {
        let mut e = weekly("a", 10.0);
        e.periodicity = Periodicity::Monthly;
        assert!(matches!(
            generate_mwp("p", &req(WEEK), &[e], &ProductionSchedule::default(), 0.0),
            Err(MwpError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn exact_search_rescues_greedy() {
        // Greedy places the tight-deadline short job first at 0, leaving no
        // room for the long one; starting the long job first works.
        let occs = vec![
            Occurrence {
                op_id: "short".into(),
                occurrence: 1,
                category: MaintenanceCategory::Electrical,
                periodicity: Periodicity::Weekly,
                duration: 1.0,
                release: 0.0,
                deadline: 10.0,
            },
            Occurrence {
                op_id: "long".into(),
                occurrence: 1,
                category: MaintenanceCategory::Electrical,
                periodicity: Periodicity::Weekly,
                duration: 4.0,
                release: 0.0,
                deadline: 11.0,
            },
        ];
        let idle = [(0.0, 4.0), (6.0, 7.0)];
        let (_, left) = greedy(&occs, &idle);
        assert_eq!(left.len(), 1);
        let placed = schedule_occurrences(&occs, &idle).unwrap();
        assert_eq!(placed[0].op_id, "long");
        assert_eq!((placed[1].start, placed[1].end), (6.0, 7.0));
    }

    #[test]
    fn detects_self_overlap() {
        let mut mwp = generate_mwp(
            "p",
            &req(WEEK),
            &[weekly("a", 10.0), weekly("b", 10.0)],
            &ProductionSchedule::default(),
            0.0,
        )
        .unwrap();
        assert!(check_feasibility(&mwp, &ProductionSchedule::default()).feasible);
        mwp.entries[1].start = 5.0;
        mwp.entries[1].end = 15.0;
        let r = check_feasibility(&mwp, &ProductionSchedule::default());
        assert!(!r.feasible && r.self_overlaps.len() == 1);
    }
}
