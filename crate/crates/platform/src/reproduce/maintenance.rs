//! Preventive and corrective maintenance costs of the fin tube and milling
//! machines, with a replay of the injected alarms.

use std::fmt::Write;

use serde::Serialize;
use twin_core::case_data::{
    fin_tube_maintenance, maintenance_rate_per_min, milling_maintenance, PublishedCosts, FIN_TUBE_ID,
    FIN_TUBE_PUBLISHED, MILLING_ID, MILLING_PUBLISHED,
};
use twin_core::economics::{cost_report, render_savings, to_f64, MaintenanceTable, SavingsReport};
use twin_core::registry::ItemId;
use twin_core::sim::campaign::{
    alarm_campaign, corrective_totals, table_alarm_plans, write_csv, AlarmRecord, AlarmReplay, ALARM_HEADER,
};
use twin_core::sim::dist::Sampling;
use twin_core::Mode;

use super::{to_json, Campaign, Check, Report, ReproduceError};

/// Tolerance on corrective totals from sampled fix times.
pub const SAMPLED_TOLERANCE: f64 = 0.03;

#[derive(Debug, Clone, Serialize)]
pub struct ReplayTotals {
    pub machine: String,
    pub mode: Mode,
    pub table_min: f64,
    pub exact_replay_min: f64,
    pub sampled_replay_min: f64,
}

struct Machine {
    name: &'static str,
    id: &'static str,
    table: MaintenanceTable,
    published: PublishedCosts,
}

fn machines() -> [Machine; 2] {
    [
        Machine {
            name: "fin tube machine",
            id: FIN_TUBE_ID,
            table: fin_tube_maintenance(),
            published: FIN_TUBE_PUBLISHED,
        },
        Machine {
            name: "milling machine",
            id: MILLING_ID,
            table: milling_maintenance(),
            published: MILLING_PUBLISHED,
        },
    ]
}

fn cost_checks(m: &Machine, r: &SavingsReport) -> Vec<Check> {
    let p = &m.published;
    let cell = |what: &str, got: f64, want: f64| Check::within(format!("{}: {what}", m.name), got, want, 0.01);
    vec![
        cell("preventive min/year before", r.before.preventive_min, p.preventive_min.0),
        cell("preventive EUR/year before", r.before.preventive_eur, p.preventive_eur.0),
        cell("corrective min/year before", r.before.corrective_min, p.corrective_min.0),
        cell("corrective EUR/year before", r.before.corrective_eur, p.corrective_eur.0),
        cell("preventive min/year after", r.after.preventive_min, p.preventive_min.1),
        cell("preventive EUR/year after", r.after.preventive_eur, p.preventive_eur.1),
        cell("corrective min/year after", r.after.corrective_min, p.corrective_min.1),
        cell("corrective EUR/year after", r.after.corrective_eur, p.corrective_eur.1),
        cell("total EUR/year before", r.before.total_eur, p.total_eur.0),
        cell("total EUR/year after", r.after.total_eur, p.total_eur.1),
        cell("preventive savings %", r.preventive_pct, p.savings_pct.0),
        cell("corrective savings %", r.corrective_pct, p.savings_pct.1),
        cell("total savings %", r.total_pct, p.savings_pct.2),
    ]
}

pub fn run(seed: u64) -> Result<Report, ReproduceError> {
    let rate = maintenance_rate_per_min();
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    let mut sampled: Vec<AlarmRecord> = Vec::new();
    let mut replay = Vec::new();
    for m in machines() {
        let r = cost_report(m.name, &m.table.0, &m.table.1, rate)?;
        checks.extend(cost_checks(&m, &r));

        let id = ItemId::new(m.id);
        let plans = table_alarm_plans(&id, &m.table);
        let exact = corrective_totals(&alarm_campaign(&plans, AlarmReplay::TableAverages, seed)?);
        let drawn = alarm_campaign(&plans, AlarmReplay::Sampled(Sampling::Stratified), seed)?;
        let drawn_totals = corrective_totals(&drawn);
        sampled.extend(drawn);
        for (mode, table_min) in [
            (Mode::Baseline, r.before.corrective_min),
            (Mode::TwinAssisted, r.after.corrective_min),
        ] {
            let key = (id.clone(), mode);
            let t = ReplayTotals {
                machine: m.name.to_string(),
                mode,
                table_min,
                exact_replay_min: exact.get(&key).map_or(0.0, |t| t.total_minutes()),
                sampled_replay_min: drawn_totals.get(&key).map_or(0.0, |t| t.total_minutes()),
            };
            checks.push(Check::that(
                format!("{}: {} alarm replay at table averages", m.name, mode.as_str()),
                t.exact_replay_min == table_min,
                format!("got {}, want {table_min} exactly", t.exact_replay_min),
            ));
            checks.push(Check::within_rel(
                format!("{}: {} alarm replay with sampled fix times", m.name, mode.as_str()),
                t.sampled_replay_min,
                table_min,
                SAMPLED_TOLERANCE,
            ));
            replay.push(t);
        }
        reports.push(r);
    }

    let mut csv = Vec::new();
    write_csv(&mut csv, ALARM_HEADER, &sampled)?;
    let costs = reports.iter().map(render_savings).collect::<Vec<_>>().join("\n");
    Ok(Report {
        campaign: Campaign::BhgeMaintenance,
        seed,
        dataset: String::from_utf8(csv).expect("csv is utf-8"),
        stats: render_replay(seed, &replay),
        costs: format!("Labour rate {:.6} EUR/min (25 EUR/h)\n\n{costs}", to_f64(rate)),
        document: serde_json::json!({
            "costs": to_json(&reports),
            "alarm_replay": to_json(&replay),
        }),
        checks,
    })
}

fn render_replay(seed: u64, rows: &[ReplayTotals]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Corrective maintenance replay of the injected alarms, seed {seed}");
    let _ = writeln!(
        out,
        "{:<18} {:<14} {:>12} {:>14} {:>14} {:>9}",
        "machine", "mode", "table", "exact replay", "sampled", "error %"
    );
    for r in rows {
        let err = (r.sampled_replay_min - r.table_min) / r.table_min * 100.0;
        let _ = writeln!(
            out,
            "{:<18} {:<14} {:>12.2} {:>14.2} {:>14.2} {:>9.3}",
            r.machine,
            r.mode.as_str(),
            r.table_min,
            r.exact_replay_min,
            r.sampled_replay_min,
            err
        );
    }
    out
}
