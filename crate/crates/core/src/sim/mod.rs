//! Seedable stand-in for the physical plant: machines with sensors, wear
//! and alarms, the carton line, and campaign generators.

pub mod campaign;
pub mod carton;
mod clock;
pub mod dist;
pub mod machine;

use thiserror::Error;

use crate::registry::StreamId;
use crate::MaintenanceCategory;

pub use campaign::{AlarmPlan, AlarmRecord, AlarmReplay, MwpTimeRecord};
pub use carton::{BatchMetrics, CartonCalibration, CartonLine, Step};
pub use clock::SimClock;
pub use dist::{LogNormalTime, Sampling};
pub use machine::{
    wear_attr, AlarmEvent, AlarmSpec, ComponentSpec, FixTime, Frame, MachineSim, MachineSpec, MaintenanceWindow,
    SensorSpec, TickOutput, YEAR_MINUTES,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("load must lie in [0, 1], got {0}")]
    InvalidLoad(f64),
    #[error("invalid time distribution: mean {mean}, sd {sd}")]
    InvalidDistribution { mean: f64, sd: f64 },
    #[error("invalid machine spec: {0}")]
    InvalidSpec(String),
    #[error("no alarm catalogue entry for category {0}")]
    UnknownCategory(MaintenanceCategory),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("unknown sensor stream `{0}`")]
    UnknownStream(StreamId),
    #[error("unknown operator {0}")]
    UnknownOperator(u32),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
