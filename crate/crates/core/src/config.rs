//! Plant scenario file (TOML): items, simulated machines, rules, standard
//! work plans, production schedules and procedures.
//!
//! ```toml
//! seed = 42
//! docs = "docs"
//!
//! [[item]]
//! id = "000X"
//! name = "fin tube machine"
//!
//! [[machine]]
//! item = "000X"
//! sample_period = 5.0
//! [[machine.sensor]]
//! stream = "000X/temperature"
//! attr = "operating temperature"
//! base = 55.0
//! band = [50.0, 75.0]
//!
//! [[rule]]
//! item = "000X"
//! attr = "operating temperature"
//! band = [0.0, 80.0]
//! severity = "alarm"
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economics::Periodicity;
use crate::registry::{ItemDefinition, ItemId};
use crate::services::mwp::{BusyWindow, PlanEntry, ProductionSchedule};
use crate::services::rules::RuleSpec;
use crate::services::tutoring::TutoringProcedure;
use crate::sim::MachineSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}line {line}, column {column}: {message}", file_prefix(.file))]
    Syntax {
        file: Option<PathBuf>,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}{message}", file_prefix(.file))]
    Invalid { file: Option<PathBuf>, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn file_prefix(file: &Option<PathBuf>) -> String {
    file.as_ref().map(|f| format!("{}: ", f.display())).unwrap_or_default()
}

impl ConfigError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Syntax { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StandardPlan {
    pub machine: ItemId,
    #[serde(rename = "entry")]
    pub entries: Vec<PlanEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub machine: ItemId,
    #[serde(default, rename = "window")]
    pub windows: Vec<BusyWindow>,
}

impl ScheduleConfig {
    pub fn schedule(&self) -> Result<ProductionSchedule, crate::services::mwp::MwpError> {
        ProductionSchedule::new(self.windows.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    /// Knowledge-base directory, relative to the config file.
    #[serde(default)]
    pub docs: Option<PathBuf>,
    #[serde(default, rename = "item")]
    pub items: Vec<ItemDefinition>,
    #[serde(default, rename = "machine")]
    pub machines: Vec<MachineSpec>,
    #[serde(default, rename = "rule")]
    pub rules: Vec<RuleSpec>,
    #[serde(default, rename = "plan")]
    pub plans: Vec<StandardPlan>,
    #[serde(default, rename = "schedule")]
    pub schedules: Vec<ScheduleConfig>,
    #[serde(default, rename = "procedure")]
    pub procedures: Vec<TutoringProcedure>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_named(text, None)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse_named(&text, Some(path))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    fn parse_named(text: &str, file: Option<&Path>) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            ConfigError::Syntax {
                file: file.map(Path::to_path_buf),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate().map_err(|message| ConfigError::Invalid {
            file: file.map(Path::to_path_buf),
            message,
        })?;
        Ok(cfg)
    }

    /// Cross-reference checks that the TOML schema alone cannot express.
    fn validate(&self) -> Result<(), String> {
        let mut ids = BTreeSet::new();
        for item in &self.items {
            if !ids.insert(&item.id) {
                return Err(format!("item `{}` declared twice", item.id));
            }
        }
        let known = |id: &ItemId, what: &str| {
            if ids.contains(id) {
                Ok(())
            } else {
                Err(format!("{what} refers to unknown item `{id}`"))
            }
        };
        let mut machines = BTreeSet::new();
        for m in &self.machines {
            known(&m.item, "machine")?;
            if !machines.insert(&m.item) {
                return Err(format!("machine `{}` declared twice", m.item));
            }
            m.validate().map_err(|e| e.to_string())?;
        }
        for r in &self.rules {
            known(&r.item, "rule")?;
        }
        for p in &self.plans {
            if !machines.contains(&p.machine) {
                return Err(format!("plan refers to unknown machine `{}`", p.machine));
            }
        }
        for s in &self.schedules {
            if !machines.contains(&s.machine) {
                return Err(format!("schedule refers to unknown machine `{}`", s.machine));
            }
            s.schedule().map_err(|e| e.to_string())?;
        }
        for p in &self.procedures {
            known(&p.item, "procedure")?;
        }
        Ok(())
    }

    pub fn docs_dir(&self) -> Option<PathBuf> {
        let d = self.docs.as_ref()?;
        Some(match &self.base_dir {
            Some(base) if d.is_relative() => base.join(d),
            _ => d.clone(),
        })
    }

    /// Longest period used by any standard plan, or one week.
    pub fn min_horizon(&self) -> f64 {
        self.plans
            .iter()
            .flat_map(|p| &p.entries)
            .map(|e| crate::services::mwp::period_minutes(e.periodicity))
            .fold(crate::services::mwp::period_minutes(Periodicity::Weekly), f64::max)
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}
