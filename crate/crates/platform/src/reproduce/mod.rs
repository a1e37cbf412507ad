//! Reproduction campaigns of the two case studies.
//!
//! Each campaign generates its dataset from a seed, runs the statistics and
//! cost calculations on it and checks the results against the published
//! figures. Output is deterministic: the same campaign and seed always give
//! byte-identical files.

pub mod carton;
pub mod maintenance;
pub mod mwp;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;
use twin_core::economics::EconomicsError;
use twin_core::sim::SimError;
use twin_core::stats::StatsError;

#[derive(Debug, Error)]
pub enum ReproduceError {
    #[error("unknown campaign `{0}` (expected bhge-mwp, bhge-maintenance or carton)")]
    UnknownCampaign(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Economics(#[from] EconomicsError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Campaign {
    /// Work-plan generation times before and after the twin.
    BhgeMwp,
    /// Preventive and corrective maintenance costs.
    BhgeMaintenance,
    /// Setup, cycle and waste on the carton line.
    Carton,
}

impl Campaign {
    pub const ALL: [Campaign; 3] = [Campaign::BhgeMwp, Campaign::BhgeMaintenance, Campaign::Carton];

    pub fn as_str(self) -> &'static str {
        match self {
            Campaign::BhgeMwp => "bhge-mwp",
            Campaign::BhgeMaintenance => "bhge-maintenance",
            Campaign::Carton => "carton",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Campaign {
    type Err = ReproduceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Campaign::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| ReproduceError::UnknownCampaign(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn that(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// `|got − want| ≤ tol`.
    pub fn within(name: impl Into<String>, got: f64, want: f64, tol: f64) -> Check {
        Check::that(name, (got - want).abs() <= tol, format!("got {got:.4}, want {want} ± {tol}"))
    }

    /// `|got − want| ≤ rel·|want|`.
    pub fn within_rel(name: impl Into<String>, got: f64, want: f64, rel: f64) -> Check {
        Check::that(
            name,
            (got - want).abs() <= rel * want.abs(),
            format!("got {got:.4}, want {want} ± {:.1}%", rel * 100.0),
        )
    }

    pub fn below(name: impl Into<String>, got: f64, limit: f64) -> Check {
        Check::that(name, got < limit, format!("got {got:.3e}, want < {limit:e}"))
    }
}

/// Everything one campaign run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub campaign: Campaign,
    pub seed: u64,
    /// Generated observations as CSV.
    pub dataset: String,
    /// Statistical analysis as a text table.
    pub stats: String,
    /// Cost or savings analysis as a text table.
    pub costs: String,
    /// Machine-readable document with the same content.
    pub document: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render_checks(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{tag}] {}: {}\n", c.name, c.detail));
        }
        out
    }

    /// Names and contents of the files written by [`Report::write`].
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let name = |suffix: &str| format!("{}-{suffix}", self.campaign);
        let mut doc = serde_json::to_string_pretty(&serde_json::json!({
            "campaign": self.campaign,
            "seed": self.seed,
            "passed": self.passed(),
            "checks": self.checks,
            "results": self.document,
        }))
        .expect("report serializes");
        doc.push('\n');
        vec![
            (name("dataset.csv"), self.dataset.clone().into_bytes()),
            (name("stats.txt"), self.stats.clone().into_bytes()),
            (name("costs.txt"), self.costs.clone().into_bytes()),
            (name("checks.txt"), self.render_checks().into_bytes()),
            (name("report.json"), doc.into_bytes()),
        ]
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ReproduceError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ReproduceError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut out = Vec::new();
        for (name, bytes) in self.files() {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(io(&path))?;
            out.push(path);
        }
        Ok(out)
    }
}

pub fn reproduce(campaign: Campaign, seed: u64) -> Result<Report, ReproduceError> {
    match campaign {
        Campaign::BhgeMwp => mwp::run(seed),
        Campaign::BhgeMaintenance => maintenance::run(seed),
        Campaign::Carton => carton::run(seed),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn campaign_names_round_trip() {
        for c in Campaign::ALL {
            assert_eq!(c.as_str().parse::<Campaign>().unwrap(), c);
        }
        assert!(matches!("bhge".parse::<Campaign>(), Err(ReproduceError::UnknownCampaign(_))));
    }

    #[test]
    fn check_helpers() {
        assert!(Check::within("a", 1.005, 1.0, 0.01).passed);
        assert!(!Check::within("a", 1.02, 1.0, 0.01).passed);
        assert!(Check::within_rel("b", 101.63, 101.64, 0.005).passed);
        assert!(!Check::below("c", 0.2, 0.1).passed);
    }
}
