//! Setup times, cycle times and waste on the four-step carton line, before
//! and with the twin.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;
use twin_core::case_data::{
    self, LsdCell, CARTON_BATCHES_PER_GROUP, CARTON_CYCLE_TOTAL, CARTON_OPERATORS, CARTON_PUBLISHED_PCT,
    CARTON_SETUP_TOTAL, CARTON_TIME_LSD_GRID, CARTON_WASTE_DELTA, CARTON_WASTE_LSD, CARTON_WASTE_MEANS,
    CARTON_WASTE_RATES,
};
use twin_core::sim::campaign::{write_csv, BATCH_HEADER};
use twin_core::sim::carton::{carton_campaign, BatchMetrics, CartonCalibration, Step};
use twin_core::sim::dist::Sampling;
use twin_core::stats::{fisher_lsd, lsd_compare, mean, one_way_anova, SampleGroup};
use twin_core::Mode;

use super::{to_json, Campaign, Check, Report, ReproduceError};

/// Calibration tolerance on aggregate means.
pub const CALIBRATION_TOLERANCE: f64 = 0.02;
const ALPHA: f64 = 0.05;
const COLUMNS: [&str; 5] = ["S1", "S2", "S3", "S4", "Whole"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Setup,
    Cycle,
    Waste,
}

impl Metric {
    fn of(self, b: &BatchMetrics) -> f64 {
        match self {
            Metric::Setup => b.setup_min,
            Metric::Cycle => b.cycle_min,
            Metric::Waste => b.waste as f64 / b.units as f64,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Metric::Setup => "setup",
            Metric::Cycle => "cycle",
            Metric::Waste => "waste",
        }
    }
}

/// Per-batch observations keyed by (operator, column, mode); column 4 is
/// the whole process. Whole-process times are sums over the steps, the
/// whole-process waste rate is total waste over total units.
struct Observations {
    values: BTreeMap<(Metric, u32, usize, Mode), Vec<f64>>,
}

impl Observations {
    fn new(rows: &[BatchMetrics]) -> Observations {
        let mut values: BTreeMap<(Metric, u32, usize, Mode), Vec<f64>> = BTreeMap::new();
        let mut whole: BTreeMap<(u32, Mode, u32), (f64, f64, u32, u32)> = BTreeMap::new();
        for b in rows {
            for m in [Metric::Setup, Metric::Cycle, Metric::Waste] {
                values.entry((m, b.operator, b.step.index(), b.mode)).or_default().push(m.of(b));
            }
            let w = whole.entry((b.operator, b.mode, b.group)).or_default();
            w.0 += b.setup_min;
            w.1 += b.cycle_min;
            w.2 += b.waste;
            w.3 += b.units;
        }
        for ((op, mode, _), (s, c, waste, units)) in whole {
            values.entry((Metric::Setup, op, 4, mode)).or_default().push(s);
            values.entry((Metric::Cycle, op, 4, mode)).or_default().push(c);
            values
                .entry((Metric::Waste, op, 4, mode))
                .or_default()
                .push(waste as f64 / units as f64);
        }
        Observations { values }
    }

    fn get(&self, m: Metric, op: u32, col: usize, mode: Mode) -> &[f64] {
        self.values.get(&(m, op, col, mode)).map_or(&[], Vec::as_slice)
    }

    /// Mean over every operator's batches.
    fn overall_mean(&self, m: Metric, col: usize, mode: Mode) -> f64 {
        let all: Vec<f64> = (1..=CARTON_OPERATORS as u32)
            .flat_map(|op| self.get(m, op, col, mode).iter().copied())
            .collect();
        mean(&all)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LsdVerdict {
    pub operator: Option<u32>,
    pub metric: Metric,
    pub column: String,
    pub baseline_mean: f64,
    pub assisted_mean: f64,
    pub lsd: f64,
    pub delta: f64,
    pub dof: usize,
    pub significant: bool,
}

fn lsd_verdict(
    operator: Option<u32>,
    metric: Metric,
    col: usize,
    before: &[f64],
    after: &[f64],
) -> Result<LsdVerdict, ReproduceError> {
    let b = SampleGroup::new("baseline", before.to_vec())?;
    let a = SampleGroup::new("twin_assisted", after.to_vec())?;
    let anova = one_way_anova(&[b, a])?;
    let lsd = fisher_lsd(anova.ms_e, before.len(), anova.n_total, anova.a, ALPHA)?;
    let (mb, ma) = (anova.group_means[0], anova.group_means[1]);
    Ok(LsdVerdict {
        operator,
        metric,
        column: COLUMNS[col].to_string(),
        baseline_mean: mb,
        assisted_mean: ma,
        lsd: lsd.lsd,
        delta: (mb - ma).abs(),
        dof: lsd.dof,
        significant: lsd_compare(mb, ma, lsd.lsd),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PublishedCell {
    pub operator: Option<u32>,
    pub metric: Metric,
    pub column: String,
    pub lsd: f64,
    pub delta: f64,
    pub significant: bool,
}

/// Verdicts for the printed per-operator time grid and aggregate waste row.
pub fn published_verdicts() -> Vec<PublishedCell> {
    let mut out = Vec::new();
    for (i, (cycle, setup)) in CARTON_TIME_LSD_GRID.iter().enumerate() {
        for (metric, row) in [(Metric::Cycle, cycle), (Metric::Setup, setup)] {
            for (col, LsdCell { lsd, delta }) in row.iter().enumerate() {
                out.push(PublishedCell {
                    operator: Some(i as u32 + 1),
                    metric,
                    column: COLUMNS[col].to_string(),
                    lsd: *lsd,
                    delta: *delta,
                    significant: lsd_compare(*delta, 0.0, *lsd),
                });
            }
        }
    }
    for col in 0..5 {
        out.push(PublishedCell {
            operator: None,
            metric: Metric::Waste,
            column: COLUMNS[col].to_string(),
            lsd: CARTON_WASTE_LSD[col],
            delta: CARTON_WASTE_DELTA[col],
            significant: lsd_compare(CARTON_WASTE_DELTA[col], 0.0, CARTON_WASTE_LSD[col]),
        });
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub name: String,
    pub generated: f64,
    pub target: f64,
}

pub fn run(seed: u64) -> Result<Report, ReproduceError> {
    let cal = CartonCalibration::default();
    let rows = carton_campaign(&cal, CARTON_BATCHES_PER_GROUP, &Mode::ALL, seed, Sampling::Stratified)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, BATCH_HEADER, &rows)?;
    let obs = Observations::new(&rows);

    let setup_targets = case_data::carton_setup_targets();
    let mut calibration = Vec::new();
    for (mode, idx) in [(Mode::Baseline, 0), (Mode::TwinAssisted, 1)] {
        let pick = |p: (f64, f64)| if idx == 0 { p.0 } else { p.1 };
        let m = mode.as_str();
        calibration.push(Calibration {
            name: format!("whole-process setup, {m}"),
            generated: obs.overall_mean(Metric::Setup, 4, mode),
            target: pick(CARTON_SETUP_TOTAL),
        });
        calibration.push(Calibration {
            name: format!("whole-process cycle, {m}"),
            generated: obs.overall_mean(Metric::Cycle, 4, mode),
            target: pick(CARTON_CYCLE_TOTAL),
        });
        for step in [Step::S1, Step::S2] {
            calibration.push(Calibration {
                name: format!("{step} setup, {m}"),
                generated: obs.overall_mean(Metric::Setup, step.index(), mode),
                target: pick(setup_targets[step.index()]),
            });
        }
    }
    calibration.sort_by(|a, b| a.name.cmp(&b.name));
    let mut checks: Vec<Check> = calibration
        .iter()
        .map(|c| Check::within_rel(format!("calibration: {}", c.name), c.generated, c.target, CALIBRATION_TOLERANCE))
        .collect();

    let mut operator_lsd = Vec::new();
    for op in 1..=CARTON_OPERATORS as u32 {
        for metric in [Metric::Cycle, Metric::Setup] {
            for col in 0..5 {
                operator_lsd.push(lsd_verdict(
                    Some(op),
                    metric,
                    col,
                    obs.get(metric, op, col, Mode::Baseline),
                    obs.get(metric, op, col, Mode::TwinAssisted),
                )?);
            }
        }
    }
    for metric in [Metric::Setup, Metric::Cycle] {
        let cells: Vec<&LsdVerdict> = operator_lsd.iter().filter(|v| v.metric == metric).collect();
        let sig = cells.iter().filter(|v| v.significant).count();
        checks.push(Check::that(
            format!("per-operator LSD: every {} pair significant", metric.label()),
            sig == cells.len(),
            format!("{sig} of {} cells with delta > LSD", cells.len()),
        ));
    }

    // Waste: one observation per operator (its mean rate), as in the
    // printed waste table.
    let mut waste_rows = Vec::new();
    let mut waste_lsd = Vec::new();
    for col in 0..5 {
        let per_op = |mode: Mode| -> Vec<f64> {
            (1..=CARTON_OPERATORS as u32)
                .map(|op| mean(obs.get(Metric::Waste, op, col, mode)))
                .collect()
        };
        let (b, a) = (per_op(Mode::Baseline), per_op(Mode::TwinAssisted));
        waste_rows.push((b.clone(), a.clone()));
        waste_lsd.push(lsd_verdict(None, Metric::Waste, col, &b, &a)?);
    }
    let sig = waste_lsd.iter().filter(|v| v.significant).count();
    checks.push(Check::that(
        "aggregate waste LSD: every step significant",
        sig == waste_lsd.len(),
        format!("{sig} of {} columns with delta > LSD", waste_lsd.len()),
    ));
    let published = published_verdicts();
    let waste_pub: Vec<&PublishedCell> = published.iter().filter(|c| c.operator.is_none()).collect();
    let sig = waste_pub.iter().filter(|c| c.significant).count();
    checks.push(Check::that(
        "printed aggregate waste LSD row: every column significant",
        sig == waste_pub.len(),
        format!("{sig} of {} columns with delta > LSD", waste_pub.len()),
    ));

    let reductions = reductions(&obs);
    let stats = render_stats(seed, &calibration, &operator_lsd, &waste_rows, &waste_lsd, &published);
    let costs = render_reductions(&reductions);
    Ok(Report {
        campaign: Campaign::Carton,
        seed,
        dataset: String::from_utf8(csv).expect("csv is utf-8"),
        stats,
        costs,
        document: serde_json::json!({
            "calibration": to_json(&calibration),
            "operator_lsd": to_json(&operator_lsd),
            "waste_lsd": to_json(&waste_lsd),
            "published_lsd": to_json(&published),
            "reductions": to_json(&reductions),
        }),
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Reduction {
    pub metric: Metric,
    pub column: String,
    pub baseline: f64,
    pub assisted: f64,
    pub minutes: f64,
    /// Reduction relative to the baseline mean.
    pub pct_of_baseline: f64,
    /// Reduction relative to the twin-assisted mean.
    pub pct_of_assisted: f64,
}

fn reductions(obs: &Observations) -> Vec<Reduction> {
    let mut out = Vec::new();
    for metric in [Metric::Setup, Metric::Cycle] {
        for col in 0..5 {
            let b = obs.overall_mean(metric, col, Mode::Baseline);
            let a = obs.overall_mean(metric, col, Mode::TwinAssisted);
            out.push(Reduction {
                metric,
                column: COLUMNS[col].to_string(),
                baseline: b,
                assisted: a,
                minutes: b - a,
                pct_of_baseline: (b - a) / b * 100.0,
                pct_of_assisted: (b - a) / a * 100.0,
            });
        }
    }
    out
}

fn render_stats(
    seed: u64,
    calibration: &[Calibration],
    operator_lsd: &[LsdVerdict],
    waste_rows: &[(Vec<f64>, Vec<f64>)],
    waste_lsd: &[LsdVerdict],
    published: &[PublishedCell],
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Carton line, {CARTON_OPERATORS} operators, {CARTON_BATCHES_PER_GROUP} batches per operator and mode, seed {seed}"
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "Calibration [min]");
    for c in calibration {
        let _ = writeln!(
            out,
            "{:<34} {:>9.2} {:>9.2} {:>+8.2}%",
            c.name,
            c.generated,
            c.target,
            (c.generated - c.target) / c.target * 100.0
        );
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "Fisher's LSD on cycle and setup times [min], generated data (alpha = {ALPHA})");
    let header = COLUMNS.iter().map(|c| format!("{c:>17}")).collect::<String>();
    let _ = writeln!(out, "{:<6} {:<6} {:<6}{header}", "op", "time", "");
    for op in 1..=CARTON_OPERATORS as u32 {
        for metric in [Metric::Cycle, Metric::Setup] {
            let cells: Vec<&LsdVerdict> = operator_lsd
                .iter()
                .filter(|v| v.operator == Some(op) && v.metric == metric)
                .collect();
            let lsd = cells.iter().map(|v| format!("{:>17.3}", v.lsd)).collect::<String>();
            let delta = cells
                .iter()
                .map(|v| format!("{:>16.3}{}", v.delta, if v.significant { '*' } else { ' ' }))
                .collect::<String>();
            let _ = writeln!(out, "{:<6} {:<6} {:<6}{lsd}", format!("Op{op}"), metric.label(), "LSD");
            let _ = writeln!(out, "{:<6} {:<6} {:<6}{delta}", "", "", "delta");
        }
    }
    let _ = writeln!(out, "* delta > LSD");

    let _ = writeln!(out);
    let _ = writeln!(out, "Waste rate per operator, generated [printed]");
    let header = COLUMNS.iter().map(|c| format!("{c:>27}")).collect::<String>();
    let _ = writeln!(out, "{:<6}{header}", "op");
    for op in 0..CARTON_OPERATORS {
        let cells = (0..5)
            .map(|col| {
                let (b, a) = (&waste_rows[col].0, &waste_rows[col].1);
                let p = CARTON_WASTE_RATES[op][col];
                format!("{:>27}", format!("{:.3}/{:.3} [{:.2}/{:.2}]", b[op], a[op], p[0], p[1]))
            })
            .collect::<String>();
        let _ = writeln!(out, "{:<6}{cells}", format!("Op{}", op + 1));
    }
    let means = (0..5)
        .map(|col| {
            let v = &waste_lsd[col];
            let p = CARTON_WASTE_MEANS[col];
            format!(
                "{:>27}",
                format!("{:.3}/{:.3} [{:.3}/{:.3}]", v.baseline_mean, v.assisted_mean, p.0, p.1)
            )
        })
        .collect::<String>();
    let _ = writeln!(out, "{:<6}{means}", "mean");
    let lsd = (0..5)
        .map(|col| format!("{:>27}", format!("{:.4} [{:.4}]", waste_lsd[col].lsd, CARTON_WASTE_LSD[col])))
        .collect::<String>();
    let _ = writeln!(out, "{:<6}{lsd}", "LSD");
    let delta = (0..5)
        .map(|col| {
            let v = &waste_lsd[col];
            let mark = if v.significant { '*' } else { ' ' };
            format!("{:>27}", format!("{:.3}{mark} [{:.3}]", v.delta, CARTON_WASTE_DELTA[col]))
        })
        .collect::<String>();
    let _ = writeln!(out, "{:<6}{delta}", "delta");

    let _ = writeln!(out);
    let _ = writeln!(out, "Printed LSD grid: cells where delta is not strictly greater than LSD");
    let weak: Vec<&PublishedCell> = published.iter().filter(|c| !c.significant).collect();
    if weak.is_empty() {
        let _ = writeln!(out, "none");
    }
    for c in &weak {
        let op = c.operator.map_or("all".to_string(), |o| format!("Op{o}"));
        let _ = writeln!(
            out,
            "{op:<6} {:<6} {:<6} LSD {:.4} delta {:.4}",
            c.metric.label(),
            c.column,
            c.lsd,
            c.delta
        );
    }
    let _ = writeln!(out, "{} of {} printed cells significant", published.len() - weak.len(), published.len());
    out
}

fn render_reductions(rows: &[Reduction]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Time reductions with the twin [min]");
    let _ = writeln!(
        out,
        "{:<6} {:<6} {:>10} {:>10} {:>10} {:>14} {:>14}",
        "time", "step", "baseline", "assisted", "saved", "% of baseline", "% of assisted"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<6} {:<6} {:>10.2} {:>10.2} {:>10.2} {:>14.2} {:>14.2}",
            r.metric.label(),
            r.column,
            r.baseline,
            r.assisted,
            r.minutes,
            r.pct_of_baseline,
            r.pct_of_assisted
        );
    }
    let _ = writeln!(
        out,
        "printed whole-process reductions: cycle {:.2}%, setup {:.2}%",
        CARTON_PUBLISHED_PCT.0, CARTON_PUBLISHED_PCT.1
    );
    out
}
