//! Work-plan generation times on the fin tube and milling machines.

use std::fmt::Write;

use serde::Serialize;
use twin_core::case_data::{
    mwp_generation_times, MwpTimeGroups, IDLE_RATE_EUR_PER_HOUR, ORDERS_PER_YEAR, PUBLISHED_MWP_INEFFICIENCY,
};
use twin_core::economics::mwp_inefficiency_cost;
use twin_core::sim::campaign::{mwp_time_campaign, write_csv, MwpTimeRecord, MWP_TIME_HEADER};
use twin_core::sim::dist::Sampling;
use twin_core::stats::{
    anderson_darling, games_howell, games_howell_summaries, one_way_anova, variance_ratio_test, AnovaResult,
    NormalityResult, PairwiseComparison, SampleGroup, Summary, VarianceMethod, VarianceTestResult,
};

use super::{to_json, Campaign, Check, Report, ReproduceError};

pub const OBSERVATIONS: usize = 50;
const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct MachineAnalysis {
    pub machine: String,
    pub item_id: String,
    pub before: Summary,
    pub after: Summary,
    pub normality: [NormalityResult; 2],
    pub bonett: VarianceTestResult,
    pub levene: VarianceTestResult,
    pub anova: AnovaResult,
    /// Games-Howell on the generated observations.
    pub games_howell: PairwiseComparison,
    /// Games-Howell on the published summary statistics.
    pub games_howell_published: PairwiseComparison,
}

/// Full battery for one machine's before/after groups.
pub fn analyse(g: &MwpTimeGroups, records: &[MwpTimeRecord]) -> Result<MachineAnalysis, ReproduceError> {
    let group = |label: &str| {
        let xs = records
            .iter()
            .filter(|r| r.machine.as_str() == g.item_id && r.group == label)
            .map(|r| r.minutes)
            .collect();
        SampleGroup::new(label, xs)
    };
    let before = group("before")?;
    let after = group("after")?;
    Ok(MachineAnalysis {
        machine: g.machine.to_string(),
        item_id: g.item_id.to_string(),
        before: Summary::of(&before)?,
        after: Summary::of(&after)?,
        normality: [anderson_darling(&before)?, anderson_darling(&after)?],
        bonett: variance_ratio_test(&before, &after, 1.0, VarianceMethod::Bonett)?,
        levene: variance_ratio_test(&before, &after, 1.0, VarianceMethod::Levene)?,
        anova: one_way_anova(&[before.clone(), after.clone()])?,
        games_howell: games_howell(&[before, after], ALPHA)?.remove(0),
        games_howell_published: games_howell_summaries(&[g.before.clone(), g.after.clone()], ALPHA)?.remove(0),
    })
}

pub fn run(seed: u64) -> Result<Report, ReproduceError> {
    let published = mwp_generation_times();
    let records = mwp_time_campaign(&published, OBSERVATIONS, seed, Sampling::Stratified)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, MWP_TIME_HEADER, &records)?;

    let analyses = published
        .iter()
        .map(|g| analyse(g, &records))
        .collect::<Result<Vec<_>, _>>()?;

    let mut checks = Vec::new();
    for (g, a) in published.iter().zip(&analyses) {
        let gh = &a.games_howell_published;
        let m = g.machine;
        checks.push(Check::within(format!("{m}: Games-Howell T from published summaries"), gh.t_value, g.t_value, 0.02));
        let half = (gh.ci.1 - gh.ci.0) / 2.0;
        let want_half = (g.ci.1 - g.ci.0) / 2.0;
        checks.push(Check::within(format!("{m}: Games-Howell CI half-width"), half, want_half, 0.05));
        checks.push(Check::below(format!("{m}: Games-Howell adjusted p"), gh.adjusted_p, 1e-6));
        checks.push(Check::below(format!("{m}: Bonett one-sided p"), a.bonett.p_value, 1e-3));
        checks.push(Check::below(format!("{m}: Levene one-sided p"), a.levene.p_value, 1e-3));
        checks.push(Check::below(format!("{m}: ANOVA p"), a.anova.p_value, 1e-6));
    }

    let published_diffs: Vec<f64> = published.iter().map(|g| g.diff).collect();
    let (per_order, per_year) = mwp_inefficiency_cost(&published_diffs, IDLE_RATE_EUR_PER_HOUR, ORDERS_PER_YEAR);
    let synthetic_diffs: Vec<f64> = analyses.iter().map(|a| a.games_howell.diff).collect();
    let synthetic = mwp_inefficiency_cost(&synthetic_diffs, IDLE_RATE_EUR_PER_HOUR, ORDERS_PER_YEAR);
    checks.push(Check::within_rel(
        "work-plan inefficiency per order",
        per_order,
        PUBLISHED_MWP_INEFFICIENCY.0,
        0.005,
    ));
    checks.push(Check::within_rel(
        "work-plan inefficiency per year",
        per_year,
        PUBLISHED_MWP_INEFFICIENCY.1,
        0.005,
    ));

    let stats = render_stats(seed, &published, &analyses);
    let costs = render_costs(&published_diffs, (per_order, per_year), &synthetic_diffs, synthetic);
    Ok(Report {
        campaign: Campaign::BhgeMwp,
        seed,
        dataset: String::from_utf8(csv).expect("csv is utf-8"),
        stats,
        costs,
        document: serde_json::json!({
            "machines": to_json(&analyses),
            "inefficiency": {
                "idle_rate_eur_per_hour": IDLE_RATE_EUR_PER_HOUR,
                "orders_per_year": ORDERS_PER_YEAR,
                "published_diffs_min": published_diffs,
                "per_order_eur": round2(per_order),
                "per_year_eur": round2(per_year),
                "synthetic_diffs_min": synthetic_diffs.iter().map(|d| round2(*d)).collect::<Vec<_>>(),
                "synthetic_per_order_eur": round2(synthetic.0),
                "synthetic_per_year_eur": round2(synthetic.1),
            },
        }),
        checks,
    })
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn ci(c: (f64, f64)) -> String {
    format!("({:.2}; {:.2})", c.0, c.1)
}

fn render_stats(seed: u64, published: &[MwpTimeGroups], analyses: &[MachineAnalysis]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Work-plan generation time [min], {OBSERVATIONS} observations per group, seed {seed}");
    let _ = writeln!(out, "Group 1 = before the twin, Group 2 = with the twin; published values in brackets.");
    for (g, a) in published.iter().zip(analyses) {
        let _ = writeln!(out);
        let _ = writeln!(out, "{} ({})", g.machine, g.item_id);
        let _ = writeln!(out, "{:<28} {:>24} {:>24}", "", "Group 1", "Group 2");
        let row = |out: &mut String, label: &str, x: [String; 2]| {
            let _ = writeln!(out, "{label:<28} {:>24} {:>24}", x[0], x[1]);
        };
        let pair = |got: f64, want: f64| format!("{got:.2} [{want:.2}]");
        let (b, f) = (&a.before, &a.after);
        row(&mut out, "N", [b.n.to_string(), f.n.to_string()]);
        row(&mut out, "Mean", [pair(b.mean, g.before.mean), pair(f.mean, g.after.mean)]);
        row(&mut out, "Standard Deviation", [pair(b.sd, g.before.sd), pair(f.sd, g.after.sd)]);
        row(&mut out, "95% CI", [ci(b.ci95), ci(f.ci95)]);
        let shape = |s: &Summary| [s.min, s.q1, s.median, s.q3, s.max, s.skewness];
        for (i, label) in ["Minimum", "Q1", "Median", "Q3", "Maximum", "Skewness"].iter().enumerate() {
            row(
                &mut out,
                label,
                [pair(shape(b)[i], g.before_shape[i]), pair(shape(f)[i], g.after_shape[i])],
            );
        }
        let _ = writeln!(out, "Anderson-Darling Normality Test");
        let ad = &a.normality;
        row(
            &mut out,
            "A-Squared",
            [
                pair(ad[0].a_squared, g.anderson_darling[0].0),
                pair(ad[1].a_squared, g.anderson_darling[1].0),
            ],
        );
        let p3 = |got: f64, want: f64| format!("{got:.3} [{want:.3}]");
        row(
            &mut out,
            "p-value",
            [
                p3(ad[0].p_value, g.anderson_darling[0].1),
                p3(ad[1].p_value, g.anderson_darling[1].1),
            ],
        );
        let _ = writeln!(out, "2 Variances One-sided Test (H1: ratio > 1)");
        let one = |out: &mut String, label: &str, v: String| {
            let _ = writeln!(out, "{label:<28} {v:>24}");
        };
        one(&mut out, "Test statistics (Bonett)", format!("{:.2}", a.bonett.statistic));
        one(&mut out, "p-value (Bonett)", format!("{:.3}", a.bonett.p_value));
        one(&mut out, "Test statistics (Levene)", format!("{:.2}", a.levene.statistic));
        one(&mut out, "p-value (Levene)", format!("{:.3}", a.levene.p_value));
        let _ = writeln!(out, "One-Way ANOVA and Games-Howell Pairwise Comparison");
        one(&mut out, "F (ANOVA)", format!("{:.2}", a.anova.f));
        one(&mut out, "p-value (ANOVA)", format!("{:.3}", a.anova.p_value));
        let gh = &a.games_howell;
        let pb = &a.games_howell_published;
        let _ = writeln!(out, "{:<28} {:>24} {:>24}", "", "generated data", "published summaries");
        let two = |out: &mut String, label: &str, x: String, y: String| {
            let _ = writeln!(out, "{label:<28} {x:>24} {y:>24}");
        };
        two(&mut out, "Difference of Means", format!("{:.2}", gh.diff), format!("{:.2} [{:.2}]", pb.diff, g.diff));
        two(&mut out, "95% CI", ci(gh.ci), format!("{} [{}]", ci(pb.ci), ci(g.ci)));
        two(&mut out, "T-value", format!("{:.2}", gh.t_value), format!("{:.2} [{:.2}]", pb.t_value, g.t_value));
        two(
            &mut out,
            "Adjusted p-value",
            format!("{:.3}", gh.adjusted_p),
            format!("{:.3}", pb.adjusted_p),
        );
    }
    out
}

fn render_costs(published: &[f64], cost: (f64, f64), synthetic: &[f64], synthetic_cost: (f64, f64)) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Cost of slow work-plan revision at {IDLE_RATE_EUR_PER_HOUR} EUR/h idle production, {ORDERS_PER_YEAR} orders/year"
    );
    let _ = writeln!(out, "{:<22} {:>20} {:>14} {:>14}", "source", "mean differences", "EUR/order", "EUR/year");
    let diffs = |d: &[f64]| d.iter().map(|x| format!("{:.2}", x.abs())).collect::<Vec<_>>().join(" + ");
    let _ = writeln!(
        out,
        "{:<22} {:>20} {:>14.2} {:>14.2}",
        "published means",
        diffs(published),
        cost.0,
        cost.1
    );
    let _ = writeln!(
        out,
        "{:<22} {:>20} {:>14.2} {:>14.2}",
        "generated data",
        diffs(synthetic),
        synthetic_cost.0,
        synthetic_cost.1
    );
    let _ = writeln!(
        out,
        "{:<22} {:>20} {:>14.2} {:>14.2}",
        "printed", "", PUBLISHED_MWP_INEFFICIENCY.0, PUBLISHED_MWP_INEFFICIENCY.1
    );
    out
}
