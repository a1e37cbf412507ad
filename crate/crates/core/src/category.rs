use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Maintenance / alarm category shared by work plans, alarm catalogues and
/// cost tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaintenanceCategory {
    Mechanical,
    Electrical,
    PneumaticHydraulic,
}

impl MaintenanceCategory {
    pub const ALL: [MaintenanceCategory; 3] = [
        MaintenanceCategory::Mechanical,
        MaintenanceCategory::Electrical,
        MaintenanceCategory::PneumaticHydraulic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MaintenanceCategory::Mechanical => "mechanical",
            MaintenanceCategory::Electrical => "electrical",
            MaintenanceCategory::PneumaticHydraulic => "pneumatic_hydraulic",
        }
    }
}

impl fmt::Display for MaintenanceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaintenanceCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mechanical" => Ok(MaintenanceCategory::Mechanical),
            "electrical" => Ok(MaintenanceCategory::Electrical),
            "pneumatic_hydraulic" | "pneumatic/hydraulic" => {
                Ok(MaintenanceCategory::PneumaticHydraulic)
            }
            other => Err(format!("unknown maintenance category `{other}`")),
        }
    }
}

/// Whether an observation was made with or without the twin's assistance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    TwinAssisted,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Baseline, Mode::TwinAssisted];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::TwinAssisted => "twin_assisted",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "twin_assisted" => Ok(Mode::TwinAssisted),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}
