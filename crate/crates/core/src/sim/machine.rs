//! A machine as seen by its sensors: bounded readings that drift with load
//! and wear, linear per-component wear, and an alarm catalogue with
//! mode-dependent fix times.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::dist::{rng, LogNormalTime, SimRng};
use super::SimError;
use crate::registry::StreamId;
use crate::{MaintenanceCategory, Mode};

/// Minutes in the planning year (52 weeks).
pub const YEAR_MINUTES: f64 = 52.0 * 7.0 * 1440.0;

/// Coefficient of variation used when an alarm's fix-time sd is not given.
pub const DEFAULT_FIX_CV: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub stream: StreamId,
    pub attr: String,
    #[serde(default)]
    pub unit: String,
    /// Reading at zero load and zero wear.
    pub base: f64,
    /// Added at full load.
    #[serde(default)]
    pub load_gain: f64,
    /// Added per unit of wear of `wear_component`.
    #[serde(default)]
    pub wear_gain: f64,
    #[serde(default)]
    pub wear_component: Option<String>,
    /// Half-width of the uniform noise.
    #[serde(default)]
    pub noise: f64,
    /// Range the healthy generator never leaves.
    pub band: [f64; 2],
}

impl SensorSpec {
    fn validate(&self, components: &[ComponentSpec]) -> Result<(), SimError> {
        let err = |reason: String| SimError::InvalidSpec(format!("sensor `{}`: {reason}", self.stream));
        let [lo, hi] = self.band;
        if !(lo < hi) {
            return Err(err("band must satisfy lo < hi".into()));
        }
        if self.noise < 0.0 {
            return Err(err("noise must be non-negative".into()));
        }
        let wear_gain = match &self.wear_component {
            Some(c) if !components.iter().any(|s| &s.name == c) => {
                return Err(err(format!("unknown wear component `{c}`")))
            }
            Some(_) => self.wear_gain,
            None => 0.0,
        };
        let min = self.base - self.noise + self.load_gain.min(0.0) + wear_gain.min(0.0);
        let max = self.base + self.noise + self.load_gain.max(0.0) + wear_gain.max(0.0);
        if min < lo || max > hi {
            return Err(err(format!("generator range [{min}, {max}] leaves band [{lo}, {hi}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub name: String,
    pub category: MaintenanceCategory,
    /// Wear gained per minute at full load.
    pub wear_rate: f64,
    #[serde(default)]
    pub initial_wear: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixTime {
    pub mean: f64,
    #[serde(default)]
    pub sd: Option<f64>,
}

impl FixTime {
    pub fn distribution(&self) -> Result<LogNormalTime, SimError> {
        LogNormalTime::new(self.mean, self.sd.unwrap_or(self.mean * DEFAULT_FIX_CV))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlarmSpec {
    pub category: MaintenanceCategory,
    /// Expected alarms per year at full load.
    pub per_year: f64,
    pub baseline: FixTime,
    pub twin_assisted: FixTime,
}

impl AlarmSpec {
    pub fn fix_time(&self, mode: Mode) -> FixTime {
        match mode {
            Mode::Baseline => self.baseline,
            Mode::TwinAssisted => self.twin_assisted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub item: crate::registry::ItemId,
    /// Minutes between sensor samples.
    pub sample_period: f64,
    /// Units produced per minute at full load.
    #[serde(default = "one")]
    pub nominal_rate: f64,
    #[serde(default)]
    pub load: f64,
    #[serde(default, rename = "sensor")]
    pub sensors: Vec<SensorSpec>,
    #[serde(default, rename = "component")]
    pub components: Vec<ComponentSpec>,
    #[serde(default, rename = "alarm")]
    pub alarms: Vec<AlarmSpec>,
}

fn one() -> f64 {
    1.0
}

impl MachineSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(SimError::InvalidSpec(format!("{}: sample_period must be > 0", self.item)));
        }
        check_load(self.load)?;
        for c in &self.components {
            if !(c.wear_rate >= 0.0 && (0.0..=1.0).contains(&c.initial_wear)) {
                return Err(SimError::InvalidSpec(format!(
                    "component `{}`: wear_rate >= 0 and initial_wear in [0, 1] required",
                    c.name
                )));
            }
        }
        for s in &self.sensors {
            s.validate(&self.components)?;
        }
        for a in &self.alarms {
            a.baseline.distribution()?;
            a.twin_assisted.distribution()?;
            if a.per_year < 0.0 {
                return Err(SimError::InvalidSpec(format!("alarm {}: per_year < 0", a.category)));
            }
        }
        Ok(())
    }

    /// Stream carrying the wear fraction of `component`.
    pub fn wear_stream(&self, component: &str) -> StreamId {
        StreamId::new(format!("{}/wear/{}", self.item, component.replace(' ', "_")))
    }
}

/// Registry attribute holding the wear fraction of a component.
pub fn wear_attr(component: &str) -> String {
    format!("wear:{component}")
}

fn check_load(load: f64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&load) {
        Ok(())
    } else {
        Err(SimError::InvalidLoad(load))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlarmEvent {
    pub machine: crate::registry::ItemId,
    pub category: MaintenanceCategory,
    pub raised_at: f64,
    pub fix_time: f64,
    pub mode: Mode,
}

/// All samples taken at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub samples: Vec<(StreamId, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TickOutput {
    pub frames: Vec<Frame>,
    pub alarms: Vec<AlarmEvent>,
    /// Maintenance windows that ended during the tick.
    pub completed: Vec<MaintenanceWindow>,
    pub produced_units: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaintenanceWindow {
    pub start: f64,
    pub end: f64,
    pub category: MaintenanceCategory,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct MachineSim {
    spec: MachineSpec,
    rng: SimRng,
    now: f64,
    load: f64,
    mode: Mode,
    wear: Vec<f64>,
    next_sample: f64,
    faults: BTreeMap<StreamId, f64>,
    maintenance: Vec<MaintenanceWindow>,
    free_running_alarms: bool,
}

impl MachineSim {
    pub fn new(spec: MachineSpec, seed: u64) -> Result<Self, SimError> {
        spec.validate()?;
        Ok(MachineSim {
            rng: rng(seed),
            now: 0.0,
            load: spec.load,
            mode: Mode::TwinAssisted,
            wear: spec.components.iter().map(|c| c.initial_wear).collect(),
            next_sample: spec.sample_period,
            faults: BTreeMap::new(),
            maintenance: Vec::new(),
            free_running_alarms: true,
            spec,
        })
    }

    pub fn spec(&self) -> &MachineSpec {
        &self.spec
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn load(&self) -> f64 {
        self.load
    }

    pub fn set_load(&mut self, load: f64) -> Result<(), SimError> {
        check_load(load)?;
        self.load = load;
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    /// Free-running Poisson alarms are on by default.
    pub fn set_free_running_alarms(&mut self, on: bool) {
        self.free_running_alarms = on;
    }

    /// `(component, wear)` pairs in spec order.
    pub fn wear(&self) -> Vec<(String, f64)> {
        self.spec
            .components
            .iter()
            .zip(&self.wear)
            .map(|(c, w)| (c.name.clone(), *w))
            .collect()
    }

    pub fn set_wear(&mut self, component: &str, wear: f64) -> Result<(), SimError> {
        let i = self.component_index(component)?;
        self.wear[i] = wear.clamp(0.0, 1.0);
        Ok(())
    }

    fn component_index(&self, component: &str) -> Result<usize, SimError> {
        self.spec
            .components
            .iter()
            .position(|c| c.name == component)
            .ok_or_else(|| SimError::UnknownComponent(component.to_string()))
    }

    pub fn inject_fault(&mut self, stream: &StreamId, offset: f64) -> Result<(), SimError> {
        if !self.spec.sensors.iter().any(|s| &s.stream == stream) {
            return Err(SimError::UnknownStream(stream.clone()));
        }
        self.faults.insert(stream.clone(), offset);
        Ok(())
    }

    pub fn clear_fault(&mut self, stream: &StreamId) {
        self.faults.remove(stream);
    }

    pub fn schedule_maintenance(&mut self, windows: impl IntoIterator<Item = MaintenanceWindow>) {
        self.maintenance.extend(windows);
        self.maintenance.sort_by(|a, b| a.end.total_cmp(&b.end));
    }

    pub fn pending_maintenance(&self) -> &[MaintenanceWindow] {
        &self.maintenance
    }

    pub fn in_maintenance(&self, t: f64) -> bool {
        self.maintenance.iter().any(|w| w.start <= t && t < w.end)
    }

    /// Raises an alarm now with a fix time drawn for `mode`.
    pub fn inject_alarm(&mut self, category: MaintenanceCategory, mode: Mode) -> Result<AlarmEvent, SimError> {
        let spec = self
            .spec
            .alarms
            .iter()
            .find(|a| a.category == category)
            .ok_or(SimError::UnknownCategory(category))?;
        let fix = spec.fix_time(mode).distribution()?.sample(&mut self.rng);
        Ok(AlarmEvent {
            machine: self.spec.item.clone(),
            category,
            raised_at: self.now,
            fix_time: round_centi(fix),
            mode,
        })
    }

    fn effective_load(&self, t: f64) -> f64 {
        if self.in_maintenance(t) {
            0.0
        } else {
            self.load
        }
    }

    /// Wear and production over `(from, to]`, splitting at maintenance
    /// boundaries so the machine produces nothing while maintained.
    fn advance_wear(&mut self, from: f64, to: f64, out: &mut TickOutput) {
        let mut cuts: Vec<f64> = self
            .maintenance
            .iter()
            .flat_map(|w| [w.start, w.end])
            .filter(|&x| x > from && x < to)
            .collect();
        cuts.push(to);
        cuts.sort_by(f64::total_cmp);
        let mut t = from;
        for cut in cuts {
            let load = self.effective_load(t);
            let dt = cut - t;
            for (w, c) in self.wear.iter_mut().zip(&self.spec.components) {
                *w = (*w + c.wear_rate * load * dt).min(1.0);
            }
            out.produced_units += self.spec.nominal_rate * load * dt;
            t = cut;
            self.complete_maintenance(t, out);
        }
    }

    fn complete_maintenance(&mut self, t: f64, out: &mut TickOutput) {
        while let Some(w) = self.maintenance.first() {
            if w.end > t {
                break;
            }
            let w = self.maintenance.remove(0);
            for (wear, c) in self.wear.iter_mut().zip(&self.spec.components) {
                if c.category == w.category {
                    *wear = 0.0;
                }
            }
            out.completed.push(w);
        }
    }

    fn read_sensors(&mut self, t: f64) -> Frame {
        let load = self.effective_load(t);
        let mut samples = Vec::with_capacity(self.spec.sensors.len() + self.wear.len());
        for s in &self.spec.sensors {
            let wear = s
                .wear_component
                .as_ref()
                .and_then(|c| self.spec.components.iter().position(|x| &x.name == c))
                .map_or(0.0, |i| self.wear[i]);
            let noise = if s.noise > 0.0 {
                self.rng.random_range(-s.noise..=s.noise)
            } else {
                0.0
            };
            let fault = self.faults.get(&s.stream).copied().unwrap_or(0.0);
            samples.push((s.stream.clone(), s.base + s.load_gain * load + s.wear_gain * wear + noise + fault));
        }
        for (c, w) in self.spec.components.iter().zip(&self.wear) {
            samples.push((self.spec.wear_stream(&c.name), *w));
        }
        Frame { t, samples }
    }

    /// Advances the machine by `dt` minutes. One frame is emitted per
    /// sample period boundary crossed.
    pub fn tick(&mut self, dt: f64) -> Result<TickOutput, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidStep(dt));
        }
        let end = self.now + dt;
        let mut out = TickOutput::default();
        while self.next_sample <= end + 1e-9 {
            let t = self.next_sample;
            self.advance_wear(self.now, t, &mut out);
            self.now = t;
            let frame = self.read_sensors(t);
            out.frames.push(frame);
            self.next_sample = t + self.spec.sample_period;
        }
        if self.now < end {
            self.advance_wear(self.now, end, &mut out);
        }
        if self.free_running_alarms && self.load > 0.0 {
            for a in &self.spec.alarms {
                let lambda = a.per_year * self.load * dt / YEAR_MINUTES;
                if lambda <= 0.0 {
                    continue;
                }
                let count = Poisson::new(lambda).expect("positive rate").sample(&mut self.rng) as usize;
                for _ in 0..count {
                    let at = self.now + (end - self.now) * self.rng.random::<f64>();
                    let fix = a.fix_time(self.mode).distribution()?.sample(&mut self.rng);
                    out.alarms.push(AlarmEvent {
                        machine: self.spec.item.clone(),
                        category: a.category,
                        raised_at: at.min(end),
                        fix_time: round_centi(fix),
                        mode: self.mode,
                    });
                }
            }
            out.alarms.sort_by(|x, y| x.raised_at.total_cmp(&y.raised_at));
        }
        self.now = end;
        Ok(out)
    }

    /// Minutes until `component` reaches `threshold` at `load`, under the
    /// linear wear model; `None` if it never does.
    pub fn time_to_wear(&self, component: &str, threshold: f64, load: f64) -> Result<Option<f64>, SimError> {
        let i = self.component_index(component)?;
        let rate = self.spec.components[i].wear_rate * load;
        let left = threshold - self.wear[i];
        Ok(if left <= 0.0 {
            Some(0.0)
        } else if rate <= 0.0 {
            None
        } else {
            Some(left / rate)
        })
    }
}

pub(crate) fn round_centi(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}
