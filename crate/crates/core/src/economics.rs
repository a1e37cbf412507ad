//! Maintenance economics: annualized preventive minutes, corrective minutes,
//! labour cost and savings. Amounts are exact rationals; rounding to cents
//! happens only for display.

use std::fmt::Write as _;
use std::io::Read;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::MaintenanceCategory;

pub type Amount = Ratio<i64>;

#[derive(Debug, Error, PartialEq)]
pub enum EconomicsError {
    #[error("division by zero: baseline amount is 0")]
    DivisionByZero,
    #[error("negative quantity `{0}`")]
    Negative(String),
    #[error("maintenance table line {line}: {message}")]
    Table { line: usize, message: String },
}

/// Minutes per hour of maintenance-operator labour: 25 €/h.
pub fn default_labor_rate() -> Amount {
    Ratio::new(25, 60)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Periodicity {
    Annual,
    Trimestral,
    Monthly,
    Weekly,
}

impl Periodicity {
    pub const ALL: [Periodicity; 4] = [
        Periodicity::Annual,
        Periodicity::Trimestral,
        Periodicity::Monthly,
        Periodicity::Weekly,
    ];

    /// Occurrences per year.
    pub fn per_year(self) -> i64 {
        match self {
            Periodicity::Annual => 1,
            Periodicity::Trimestral => 4,
            Periodicity::Monthly => 12,
            Periodicity::Weekly => 52,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Periodicity::Annual => "annual",
            Periodicity::Trimestral => "trimestral",
            Periodicity::Monthly => "monthly",
            Periodicity::Weekly => "weekly",
        }
    }
}

/// Per-occurrence preventive minutes of one category, by periodicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MwpCostRow {
    pub category: MaintenanceCategory,
    /// Indexed like [`Periodicity::ALL`].
    pub minutes: [Amount; 4],
}

impl MwpCostRow {
    pub fn new(category: MaintenanceCategory, annual: i64, trimestral: i64, monthly: i64, weekly: i64) -> Self {
        MwpCostRow {
            category,
            minutes: [annual, trimestral, monthly, weekly].map(Ratio::from_integer),
        }
    }

    pub fn minutes_for(&self, p: Periodicity) -> Amount {
        self.minutes[p as usize]
    }

    pub fn annual_minutes(&self) -> Amount {
        Periodicity::ALL
            .iter()
            .map(|p| self.minutes_for(*p) * p.per_year())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectiveRow {
    pub category: MaintenanceCategory,
    pub alarm_count: i64,
    pub avg_fix_time: Amount,
}

impl CorrectiveRow {
    pub fn new(category: MaintenanceCategory, alarm_count: i64, avg_fix_time: i64) -> Self {
        CorrectiveRow {
            category,
            alarm_count,
            avg_fix_time: Ratio::from_integer(avg_fix_time),
        }
    }

    pub fn minutes(&self) -> Amount {
        self.avg_fix_time * self.alarm_count
    }
}

pub fn annualize(rows: &[MwpCostRow]) -> Amount {
    rows.iter().map(MwpCostRow::annual_minutes).sum()
}

/// Annual minutes per periodicity column, summed over categories.
pub fn annualize_by_periodicity(rows: &[MwpCostRow]) -> [Amount; 4] {
    Periodicity::ALL.map(|p| {
        rows.iter()
            .map(|r| r.minutes_for(p) * p.per_year())
            .sum()
    })
}

pub fn corrective_minutes(rows: &[CorrectiveRow]) -> Amount {
    rows.iter().map(CorrectiveRow::minutes).sum()
}

pub fn cost(minutes: Amount, labor_rate: Amount) -> Amount {
    minutes * labor_rate
}

/// Percentage reduction from `before` to `after`.
pub fn savings_pct(before: Amount, after: Amount) -> Result<Amount, EconomicsError> {
    if before.is_zero() {
        return Err(EconomicsError::DivisionByZero);
    }
    Ok((before - after) / before * 100)
}

/// Rounds half away from zero to `decimals` places.
pub fn round_to(x: Amount, decimals: u32) -> f64 {
    let scale = 10i64.pow(decimals);
    let r = (x * scale).round() / scale;
    r.to_f64().expect("rational fits in f64")
}

pub fn to_f64(x: Amount) -> f64 {
    x.to_f64().expect("rational fits in f64")
}

/// Preventive and corrective rows of one phase (before or after).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaintenanceBlock {
    pub preventive: Vec<MwpCostRow>,
    pub corrective: Vec<CorrectiveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub labor_rate_per_min: f64,
    /// Annual preventive minutes per periodicity column.
    pub preventive_by_periodicity: [f64; 4],
    pub preventive_by_periodicity_eur: [f64; 4],
    pub preventive_min: f64,
    pub preventive_eur: f64,
    pub corrective_min: f64,
    pub corrective_eur: f64,
    pub total_min: f64,
    pub total_eur: f64,
}

/// Exact amounts behind a [`CostReport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostBreakdown {
    pub by_periodicity: [Amount; 4],
    pub preventive_min: Amount,
    pub corrective_min: Amount,
    pub labor_rate: Amount,
}

impl CostBreakdown {
    pub fn of(block: &MaintenanceBlock, labor_rate: Amount) -> Self {
        CostBreakdown {
            by_periodicity: annualize_by_periodicity(&block.preventive),
            preventive_min: annualize(&block.preventive),
            corrective_min: corrective_minutes(&block.corrective),
            labor_rate,
        }
    }

    pub fn total_min(&self) -> Amount {
        self.preventive_min + self.corrective_min
    }

    pub fn preventive_eur(&self) -> Amount {
        cost(self.preventive_min, self.labor_rate)
    }

    pub fn corrective_eur(&self) -> Amount {
        cost(self.corrective_min, self.labor_rate)
    }

    pub fn total_eur(&self) -> Amount {
        cost(self.total_min(), self.labor_rate)
    }

    pub fn report(&self) -> CostReport {
        CostReport {
            labor_rate_per_min: to_f64(self.labor_rate),
            preventive_by_periodicity: self.by_periodicity.map(to_f64),
            preventive_by_periodicity_eur: self
                .by_periodicity
                .map(|m| round_to(cost(m, self.labor_rate), 2)),
            preventive_min: to_f64(self.preventive_min),
            preventive_eur: round_to(self.preventive_eur(), 2),
            corrective_min: to_f64(self.corrective_min),
            corrective_eur: round_to(self.corrective_eur(), 2),
            total_min: to_f64(self.total_min()),
            total_eur: round_to(self.total_eur(), 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsReport {
    pub machine: String,
    pub before: CostReport,
    pub after: CostReport,
    /// Percentages rounded to two decimals.
    pub preventive_pct: f64,
    pub corrective_pct: f64,
    pub total_pct: f64,
}

pub fn cost_report(
    machine: &str,
    before: &MaintenanceBlock,
    after: &MaintenanceBlock,
    labor_rate: Amount,
) -> Result<SavingsReport, EconomicsError> {
    let b = CostBreakdown::of(before, labor_rate);
    let a = CostBreakdown::of(after, labor_rate);
    Ok(SavingsReport {
        machine: machine.to_string(),
        before: b.report(),
        after: a.report(),
        preventive_pct: round_to(savings_pct(b.preventive_eur(), a.preventive_eur())?, 2),
        corrective_pct: round_to(savings_pct(b.corrective_eur(), a.corrective_eur())?, 2),
        total_pct: round_to(savings_pct(b.total_eur(), a.total_eur())?, 2),
    })
}

/// Cost of slow work-plan revisions: the summed per-machine time gap
/// (minutes) billed at the idle-production rate, per order and per year.
pub fn mwp_inefficiency_cost(
    mean_diffs_min: &[f64],
    idle_rate_per_hour: f64,
    orders_per_year: f64,
) -> (f64, f64) {
    let hours: f64 = mean_diffs_min.iter().map(|d| d.abs()).sum::<f64>() / 60.0;
    let per_order = hours * idle_rate_per_hour;
    (per_order, per_order * orders_per_year)
}

/// Renders one machine's before/after table as plain text.
pub fn render_savings(r: &SavingsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Maintenance costs: {}", r.machine);
    let _ = writeln!(
        out,
        "{:<8} {:>10} {:>10} {:>10} {:>10} {:>12} {:>12} {:>12}",
        "phase", "annual", "trimestral", "monthly", "weekly", "preventive", "corrective", "total"
    );
    for (label, c) in [("before", &r.before), ("after", &r.after)] {
        let p = c.preventive_by_periodicity;
        let _ = writeln!(
            out,
            "{:<8} {:>10} {:>10} {:>10} {:>10} {:>12} {:>12} {:>12}   [min/year]",
            label, p[0], p[1], p[2], p[3], c.preventive_min, c.corrective_min, c.total_min
        );
        let e = c.preventive_by_periodicity_eur;
        let _ = writeln!(
            out,
            "{:<8} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>12.2} {:>12.2} {:>12.2}   [EUR/year]",
            "", e[0], e[1], e[2], e[3], c.preventive_eur, c.corrective_eur, c.total_eur
        );
    }
    let _ = writeln!(
        out,
        "savings: preventive {:.2}%  corrective {:.2}%  total {:.2}%",
        r.preventive_pct, r.corrective_pct, r.total_pct
    );
    out
}

fn parse_amount(raw: &str, line: usize, field: &str) -> Result<Amount, EconomicsError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Amount::zero());
    }
    let err = || EconomicsError::Table {
        line,
        message: format!("invalid number `{raw}` in column `{field}`"),
    };
    // Accept decimal comma as well as decimal point.
    let raw = raw.replace(',', ".");
    let (int, frac) = raw.split_once('.').unwrap_or((&raw, ""));
    if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
    if int < 0 || raw.starts_with('-') {
        return Err(EconomicsError::Negative(format!("{field} on line {line}")));
    }
    let scale = 10i64.pow(frac.len() as u32);
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
    Ok(Ratio::new(int * scale + frac, scale))
}

/// One machine's table: `(before, after)`.
pub type MaintenanceTable = (MaintenanceBlock, MaintenanceBlock);

/// Parses a maintenance table with header
/// `phase,category,annual,trimestral,monthly,weekly,alarms,avg_fix_min`.
/// Empty cells count as 0.
pub fn parse_maintenance_csv(input: impl Read) -> Result<MaintenanceTable, EconomicsError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let expected = [
        "phase",
        "category",
        "annual",
        "trimestral",
        "monthly",
        "weekly",
        "alarms",
        "avg_fix_min",
    ];
    let headers = reader.headers().map_err(|e| EconomicsError::Table {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(EconomicsError::Table {
            line: 1,
            message: format!("header must be `{}`", expected.join(",")),
        });
    }
    let mut before = MaintenanceBlock { preventive: vec![], corrective: vec![] };
    let mut after = before.clone();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| EconomicsError::Table {
            line,
            message: e.to_string(),
        })?;
        let block = match &rec[0] {
            "before" => &mut before,
            "after" => &mut after,
            other => {
                return Err(EconomicsError::Table {
                    line,
                    message: format!("phase must be `before` or `after`, got `{other}`"),
                })
            }
        };
        let category: MaintenanceCategory = rec[1]
            .parse()
            .map_err(|message| EconomicsError::Table { line, message })?;
        let mut minutes = [Amount::zero(); 4];
        for (k, p) in Periodicity::ALL.iter().enumerate() {
            minutes[k] = parse_amount(&rec[2 + k], line, p.as_str())?;
        }
        block.preventive.push(MwpCostRow { category, minutes });
        let alarms = parse_amount(&rec[6], line, "alarms")?;
        if !alarms.is_integer() {
            return Err(EconomicsError::Table {
                line,
                message: "alarm count must be an integer".into(),
            });
        }
        block.corrective.push(CorrectiveRow {
            category,
            alarm_count: alarms.to_integer(),
            avg_fix_time: parse_amount(&rec[7], line, "avg_fix_min")?,
        });
    }
    Ok((before, after))
}

#[cfg(test)]
mod tests {
    use super::*;
    use MaintenanceCategory::*;

    fn r(n: i64) -> Amount {
        Ratio::from_integer(n)
    }

    #[test]
    fn annualize_mechanical_row() {
        let row = MwpCostRow::new(Mechanical, 221, 1047, 1076, 73);
        assert_eq!(row.annual_minutes(), r(21117));
        assert_eq!(annualize(&[]), r(0));
    }

    #[test]
    fn corrective_sum() {
        let rows = [
            CorrectiveRow::new(Mechanical, 60, 95),
            CorrectiveRow::new(Electrical, 26, 57),
            CorrectiveRow::new(PneumaticHydraulic, 40, 132),
        ];
        assert_eq!(corrective_minutes(&rows), r(12462));
        assert_eq!(corrective_minutes(&[CorrectiveRow::new(Mechanical, 0, 95)]), r(0));
    }

    #[test]
    fn cost_uses_exact_rate() {
        let c = cost(r(33629), default_labor_rate());
        assert_eq!(round_to(c, 2), 14012.08);
        assert_eq!(round_to(cost(r(28640), default_labor_rate()), 2), 11933.33);
        let s = savings_pct(r(33629), r(28640)).unwrap();
        assert_eq!(round_to(s, 2), 14.84);
    }

    #[test]
    fn savings_edge_cases() {
        assert_eq!(savings_pct(r(5), r(5)).unwrap(), r(0));
        assert_eq!(savings_pct(r(0), r(5)), Err(EconomicsError::DivisionByZero));
    }

    #[test]
    fn inefficiency_unit_conversion() {
        assert_eq!(mwp_inefficiency_cost(&[60.0], 50.0, 1.0), (50.0, 50.0));
        assert_eq!(mwp_inefficiency_cost(&[0.0, 0.0], 50.0, 50.0), (0.0, 0.0));
        let (o, y) = mwp_inefficiency_cost(&[-77.09, -44.87], 50.0, 50.0);
        assert!((o - 101.6333333).abs() < 1e-6);
        assert!((y - 5081.666667).abs() < 1e-5);
    }

    #[test]
    fn csv_parse_and_errors() {
        let text = "phase,category,annual,trimestral,monthly,weekly,alarms,avg_fix_min\n\
                    before,mechanical,221,1047,1076,73,60,95\n\
                    after,mechanical,184,897,916,59,60,71.5\n";
        let (b, a) = parse_maintenance_csv(text.as_bytes()).unwrap();
        assert_eq!(annualize(&b.preventive), r(21117));
        assert_eq!(a.corrective[0].avg_fix_time, Ratio::new(143, 2));

        let bad = "phase,category,annual,trimestral,monthly,weekly,alarms,avg_fix_min\n\
                   before,mechanical,x,1,1,1,1,1\n";
        assert!(matches!(
            parse_maintenance_csv(bad.as_bytes()),
            Err(EconomicsError::Table { line: 2, .. })
        ));
        let bad = "phase,category,annual,trimestral,monthly,weekly,alarms,avg_fix_min\n\
                   during,mechanical,1,1,1,1,1,1\n";
        assert!(parse_maintenance_csv(bad.as_bytes()).is_err());
    }
}
