//! The four-step carton line: print (S1), cut (S2), punch the grips (S3),
//! fold and glue (S4). Each batch passes through every step; a step's cycle
//! time is its setup time plus an automated processing time that does not
//! depend on the operator or on the twin.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::dist::{rng, sub_seed, LogNormalTime, Sampling, SimRng};
use super::SimError;
use crate::case_data;
use crate::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Step {
    S1,
    S2,
    S3,
    S4,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::S1, Step::S2, Step::S3, Step::S4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        ["S1", "S2", "S3", "S4"][self.index()]
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Step {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Step::ALL
            .into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown step `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    /// Batch number within its (operator, mode) group, from 1.
    pub group: u32,
    /// Operator number, from 1.
    pub operator: u32,
    pub step: Step,
    pub mode: Mode,
    pub setup_min: f64,
    pub cycle_min: f64,
    pub units: u32,
    pub waste: u32,
}

/// Per-step levels the line is calibrated to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartonCalibration {
    /// Mean setup minutes per step, (baseline, twin-assisted).
    pub setup: [(f64, f64); 4],
    /// Mean processing minutes per step.
    pub processing: [f64; 4],
    pub setup_cv: f64,
    pub processing_cv: f64,
    /// Multiplies an operator's setup times; should average 1.
    pub operator_speed: Vec<f64>,
    /// Per-unit waste probability `[operator][step][mode]`.
    pub waste_rates: Vec<[[f64; 2]; 4]>,
    pub units_per_batch: u32,
}

impl Default for CartonCalibration {
    fn default() -> Self {
        CartonCalibration {
            setup: case_data::carton_setup_targets(),
            processing: case_data::carton_processing_minutes(),
            setup_cv: 0.10,
            processing_cv: 0.03,
            operator_speed: case_data::CARTON_OPERATOR_SPEED.to_vec(),
            waste_rates: case_data::CARTON_WASTE_RATES
                .iter()
                .map(|op| [op[0], op[1], op[2], op[3]])
                .collect(),
            units_per_batch: case_data::CARTON_UNITS_PER_BATCH,
        }
    }
}

impl CartonCalibration {
    pub fn operators(&self) -> usize {
        self.operator_speed.len()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.operator_speed.is_empty() || self.operator_speed.len() != self.waste_rates.len() {
            return Err(SimError::InvalidSpec(
                "operator_speed and waste_rates must be non-empty and the same length".into(),
            ));
        }
        if self.operator_speed.iter().any(|s| !(*s > 0.0)) {
            return Err(SimError::InvalidSpec("operator speeds must be > 0".into()));
        }
        let rates_ok = self
            .waste_rates
            .iter()
            .flatten()
            .flatten()
            .all(|r| (0.0..=1.0).contains(r));
        if !rates_ok {
            return Err(SimError::InvalidSpec("waste rates must lie in [0, 1]".into()));
        }
        for (s, p) in self.setup.iter().zip(&self.processing) {
            LogNormalTime::new(s.0, s.0 * self.setup_cv)?;
            LogNormalTime::new(s.1, s.1 * self.setup_cv)?;
            LogNormalTime::new(*p, p * self.processing_cv)?;
        }
        Ok(())
    }

    pub fn setup_dist(&self, operator: usize, step: Step, mode: Mode) -> LogNormalTime {
        let (b, a) = self.setup[step.index()];
        let m = match mode {
            Mode::Baseline => b,
            Mode::TwinAssisted => a,
        } * self.operator_speed[operator];
        LogNormalTime { mean: m, sd: m * self.setup_cv }
    }

    pub fn processing_dist(&self, step: Step) -> LogNormalTime {
        let p = self.processing[step.index()];
        LogNormalTime {
            mean: p,
            sd: p * self.processing_cv,
        }
    }

    pub fn waste_rate(&self, operator: usize, step: Step, mode: Mode) -> f64 {
        self.waste_rates[operator][step.index()][mode as usize]
    }
}

pub struct CartonLine {
    cal: CartonCalibration,
    rng: SimRng,
}

impl CartonLine {
    pub fn new(cal: CartonCalibration, seed: u64) -> Result<Self, SimError> {
        cal.validate()?;
        Ok(CartonLine { cal, rng: rng(seed) })
    }

    pub fn calibration(&self) -> &CartonCalibration {
        &self.cal
    }

    /// One batch through one step by `operator` (1-based).
    pub fn run_batch(&mut self, operator: u32, step: Step, mode: Mode) -> Result<BatchMetrics, SimError> {
        let op = self.operator_index(operator)?;
        let setup = self.cal.setup_dist(op, step, mode).sample(&mut self.rng);
        let processing = self.cal.processing_dist(step).sample(&mut self.rng);
        let waste = draw_waste(&mut self.rng, self.cal.units_per_batch, self.cal.waste_rate(op, step, mode));
        Ok(BatchMetrics {
            group: 1,
            operator,
            step,
            mode,
            setup_min: setup,
            cycle_min: setup + processing,
            units: self.cal.units_per_batch,
            waste,
        })
    }

    fn operator_index(&self, operator: u32) -> Result<usize, SimError> {
        let i = (operator as usize).wrapping_sub(1);
        if i < self.cal.operators() {
            Ok(i)
        } else {
            Err(SimError::UnknownOperator(operator))
        }
    }
}

fn draw_waste(rng: &mut impl Rng, units: u32, p: f64) -> u32 {
    if p <= 0.0 {
        return 0;
    }
    Binomial::new(units as u64, p).expect("rate in [0, 1]").sample(rng) as u32
}

/// Every batch of a carton campaign, ordered by operator, mode, batch and
/// step. Each (operator, step, mode) series is drawn from its own sub-seed.
pub fn carton_campaign(
    cal: &CartonCalibration,
    batches: usize,
    modes: &[Mode],
    seed: u64,
    sampling: Sampling,
) -> Result<Vec<BatchMetrics>, SimError> {
    cal.validate()?;
    let mut out = Vec::with_capacity(cal.operators() * modes.len() * batches * 4);
    for op in 0..cal.operators() {
        for &mode in modes {
            let series: Vec<(Vec<f64>, Vec<f64>, Vec<u32>)> = Step::ALL
                .iter()
                .map(|&step| {
                    let label = format!("carton/{op}/{step}/{mode}");
                    let mut r = rng(sub_seed(seed, &label));
                    let setup = sampling.draw(&cal.setup_dist(op, step, mode), batches, &mut r);
                    let proc = sampling.draw(&cal.processing_dist(step), batches, &mut r);
                    let p = cal.waste_rate(op, step, mode);
                    let waste = (0..batches).map(|_| draw_waste(&mut r, cal.units_per_batch, p)).collect();
                    (setup, proc, waste)
                })
                .collect();
            for b in 0..batches {
                for (step, (setup, proc, waste)) in Step::ALL.iter().zip(&series) {
                    out.push(BatchMetrics {
                        group: b as u32 + 1,
                        operator: op as u32 + 1,
                        step: *step,
                        mode,
                        setup_min: setup[b],
                        cycle_min: setup[b] + proc[b],
                        units: cal.units_per_batch,
                        waste: waste[b],
                    });
                }
            }
        }
    }
    Ok(out)
}
