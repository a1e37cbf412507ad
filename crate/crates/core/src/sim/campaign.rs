//! Reproducible observation campaigns and their CSV forms.
//!
//! * carton batches: `group,operator,step,mode,setup_min,cycle_min,units,waste`
//! * corrective alarms: `machine,category,mode,fix_min`
//! * work-plan generation times: `machine,group,mode,minutes`

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_rational::Ratio;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::dist::{rng, sub_seed, LogNormalTime, Sampling};
use super::machine::{round_centi, FixTime, DEFAULT_FIX_CV};
use super::SimError;
use crate::case_data::MwpTimeGroups;
use crate::economics::{to_f64, MaintenanceTable};
use crate::registry::ItemId;
use crate::{MaintenanceCategory, Mode};

pub const BATCH_HEADER: &[&str] = &["group", "operator", "step", "mode", "setup_min", "cycle_min", "units", "waste"];
pub const ALARM_HEADER: &[&str] = &["machine", "category", "mode", "fix_min"];
pub const MWP_TIME_HEADER: &[&str] = &["machine", "group", "mode", "minutes"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlarmRecord {
    pub machine: ItemId,
    pub category: MaintenanceCategory,
    pub mode: Mode,
    pub fix_min: f64,
}

/// Alarms of one category to replay on one machine.
#[derive(Debug, Clone, PartialEq)]
pub struct AlarmPlan {
    pub machine: ItemId,
    pub category: MaintenanceCategory,
    pub mode: Mode,
    pub count: usize,
    pub fix: FixTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmReplay {
    /// Every alarm takes exactly the tabulated average.
    TableAverages,
    /// Fix times drawn from the lognormal around the average.
    Sampled(Sampling),
}

/// Replay plans from a before/after maintenance table: the before block
/// runs in baseline mode, the after block twin-assisted.
pub fn table_alarm_plans(machine: &ItemId, table: &MaintenanceTable) -> Vec<AlarmPlan> {
    let mut out = Vec::new();
    for (block, mode) in [(&table.0, Mode::Baseline), (&table.1, Mode::TwinAssisted)] {
        for row in &block.corrective {
            let mean = to_f64(row.avg_fix_time);
            out.push(AlarmPlan {
                machine: machine.clone(),
                category: row.category,
                mode,
                count: row.alarm_count.max(0) as usize,
                fix: FixTime {
                    mean,
                    sd: Some(mean * DEFAULT_FIX_CV),
                },
            });
        }
    }
    out
}

pub fn alarm_campaign(plans: &[AlarmPlan], replay: AlarmReplay, seed: u64) -> Result<Vec<AlarmRecord>, SimError> {
    let mut out = Vec::new();
    for plan in plans {
        let times: Vec<f64> = match replay {
            AlarmReplay::TableAverages => vec![plan.fix.mean; plan.count],
            AlarmReplay::Sampled(sampling) => {
                let label = format!("alarms/{}/{}/{}", plan.machine, plan.category, plan.mode);
                let mut r = rng(sub_seed(seed, &label));
                sampling.draw(&plan.fix.distribution()?, plan.count, &mut r)
            }
        };
        out.extend(times.into_iter().map(|t| AlarmRecord {
            machine: plan.machine.clone(),
            category: plan.category,
            mode: plan.mode,
            fix_min: round_centi(t),
        }));
    }
    Ok(out)
}

/// Corrective minutes of one (machine, mode), kept in exact hundredths of a
/// minute.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrectiveTotals {
    /// category → (alarm count, total centiminutes)
    pub per_category: BTreeMap<MaintenanceCategory, (i64, i64)>,
}

impl CorrectiveTotals {
    pub fn total_centi(&self) -> i64 {
        self.per_category.values().map(|(_, c)| c).sum()
    }

    pub fn total_minutes(&self) -> f64 {
        self.total_centi() as f64 / 100.0
    }

    /// Σ count × mean fix time, with the mean taken exactly.
    pub fn count_times_mean(&self) -> Ratio<i64> {
        self.per_category
            .values()
            .filter(|(n, _)| *n > 0)
            .map(|&(n, c)| Ratio::from_integer(n) * Ratio::new(c, n))
            .sum()
    }

    pub fn mean_fix(&self, category: MaintenanceCategory) -> Option<f64> {
        self.per_category
            .get(&category)
            .filter(|(n, _)| *n > 0)
            .map(|&(n, c)| c as f64 / 100.0 / n as f64)
    }
}

pub fn corrective_totals(records: &[AlarmRecord]) -> BTreeMap<(ItemId, Mode), CorrectiveTotals> {
    let mut out: BTreeMap<(ItemId, Mode), CorrectiveTotals> = BTreeMap::new();
    for r in records {
        let e = out
            .entry((r.machine.clone(), r.mode))
            .or_default()
            .per_category
            .entry(r.category)
            .or_insert((0, 0));
        e.0 += 1;
        e.1 += (r.fix_min * 100.0).round() as i64;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwpTimeRecord {
    pub machine: ItemId,
    /// `before` or `after`.
    pub group: String,
    pub mode: Mode,
    pub minutes: f64,
}

/// Work-plan generation times for each machine, `n` per group, drawn from
/// lognormals with the published means and standard deviations.
pub fn mwp_time_campaign(
    groups: &[MwpTimeGroups],
    n: usize,
    seed: u64,
    sampling: Sampling,
) -> Result<Vec<MwpTimeRecord>, SimError> {
    let mut out = Vec::new();
    for g in groups {
        for (label, mode, s) in [("before", Mode::Baseline, &g.before), ("after", Mode::TwinAssisted, &g.after)] {
            let d = LogNormalTime::new(s.mean, s.sd)?;
            let mut r = rng(sub_seed(seed, &format!("mwp-time/{}/{label}", g.item_id)));
            out.extend(sampling.draw(&d, n, &mut r).into_iter().map(|m| MwpTimeRecord {
                machine: ItemId::new(g.item_id),
                group: label.to_string(),
                mode,
                minutes: m,
            }));
        }
    }
    Ok(out)
}

pub fn write_csv<T: Serialize>(out: impl Write, header: &[&str], rows: &[T]) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(input: impl Read, header: &[&str]) -> Result<Vec<T>, SimError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let got: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if got != header {
        return Err(SimError::Csv {
            line: 1,
            message: format!("expected header `{}`, got `{}`", header.join(","), got.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        out.push(rec.map_err(|e| SimError::Csv {
            line: i + 2,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> SimError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    SimError::Csv {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_data::{fin_tube_maintenance, milling_maintenance, mwp_generation_times};
    use crate::sim::carton::{carton_campaign, BatchMetrics, CartonCalibration};

    #[test]
    fn table_average_replay_is_exact() {
        let plans = table_alarm_plans(&"000X".into(), &fin_tube_maintenance());
        let recs = alarm_campaign(&plans, AlarmReplay::TableAverages, 0).unwrap();
        assert_eq!(recs.len(), 2 * (60 + 26 + 40));
        let t = corrective_totals(&recs);
        assert_eq!(t[&("000X".into(), Mode::Baseline)].total_centi(), 1_246_200);
        assert_eq!(t[&("000X".into(), Mode::TwinAssisted)].total_centi(), 963_200);
    }

    #[test]
    fn sampled_totals_conserve() {
        let plans = table_alarm_plans(&"000Y".into(), &milling_maintenance());
        let recs = alarm_campaign(&plans, AlarmReplay::Sampled(Sampling::Iid), 3).unwrap();
        for totals in corrective_totals(&recs).values() {
            assert_eq!(totals.count_times_mean(), Ratio::from_integer(totals.total_centi()));
        }
    }

    #[test]
    fn batch_csv_round_trip_and_header() {
        let rows = carton_campaign(&CartonCalibration::default(), 2, &Mode::ALL, 4, Sampling::Stratified).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, BATCH_HEADER, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("group,operator,step,mode,setup_min,cycle_min,units,waste\n1,1,S1,baseline,"));
        let back: Vec<BatchMetrics> = read_csv(buf.as_slice(), BATCH_HEADER).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn csv_errors_carry_lines() {
        let bad = "machine,category,mode,fix_min\n000X,mechanical,baseline,12.5\n000X,hydraulic,baseline,1\n";
        match read_csv::<AlarmRecord>(bad.as_bytes(), ALARM_HEADER) {
            Err(SimError::Csv { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        let no_header = "000X,mechanical,baseline,12.5\n";
        assert!(matches!(
            read_csv::<AlarmRecord>(no_header.as_bytes(), ALARM_HEADER),
            Err(SimError::Csv { line: 1, .. })
        ));
    }

    #[test]
    fn mwp_time_groups_sized_and_seeded() {
        let a = mwp_time_campaign(&mwp_generation_times(), 50, 8, Sampling::Stratified).unwrap();
        assert_eq!(a.len(), 200);
        let mut buf1 = Vec::new();
        let mut buf2 = Vec::new();
        write_csv(&mut buf1, MWP_TIME_HEADER, &a).unwrap();
        let b = mwp_time_campaign(&mwp_generation_times(), 50, 8, Sampling::Stratified).unwrap();
        write_csv(&mut buf2, MWP_TIME_HEADER, &b).unwrap();
        assert_eq!(buf1, buf2);
    }
}
