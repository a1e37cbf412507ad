//! What-if forecasts. A copy of the machine model is started from the
//! twin's current wear and run forward under the requested load. Nothing
//! touches the live twin.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TwinError;
use crate::registry::ItemId;
use crate::sim::{AlarmEvent, MachineSim, MachineSpec};

/// Wear fraction at which a component is due for replacement.
pub const WEAR_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrognosisScenario {
    /// Load in [0, 1].
    pub load: f64,
    /// Minutes to look ahead.
    pub horizon: f64,
    /// Minutes between trajectory points; defaults to horizon / 20.
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WearPoint {
    pub t: f64,
    pub wear: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub machine: ItemId,
    pub from: f64,
    pub horizon: f64,
    pub load: f64,
    pub threshold: f64,
    pub wear_trajectory: Vec<WearPoint>,
    /// Minutes from `from` until each component reaches the threshold.
    pub time_to_threshold: BTreeMap<String, Option<f64>>,
    pub predicted_alarms: Vec<AlarmEvent>,
    /// Expected alarm count over the horizon.
    pub expected_alarms: f64,
    pub predicted_throughput: f64,
}

/// Runs the forecast. `wear` holds the current wear of each component; `now`
/// is the current simulation time.
pub fn prognose(
    spec: &MachineSpec,
    wear: &[(String, f64)],
    now: f64,
    scenario: &PrognosisScenario,
    seed: u64,
) -> Result<Forecast, TwinError> {
    let s = scenario;
    if !(0.0..=1.0).contains(&s.load) {
        return Err(TwinError::BadRequest(format!("load {} outside [0, 1]", s.load)));
    }
    if !(s.horizon >= 0.0 && s.horizon.is_finite()) {
        return Err(TwinError::BadRequest(format!("horizon {} must be >= 0", s.horizon)));
    }
    let mut spec = spec.clone();
    spec.load = s.load;
    let mut sim = MachineSim::new(spec, s.seed.unwrap_or(seed))?;
    for (c, w) in wear {
        sim.set_wear(c, *w)?;
    }
    let point = |sim: &MachineSim, t: f64| WearPoint {
        t,
        wear: sim.wear().into_iter().collect(),
    };
    let mut time_to_threshold = BTreeMap::new();
    for (c, _) in sim.wear() {
        time_to_threshold.insert(c.clone(), sim.time_to_wear(&c, WEAR_THRESHOLD, s.load)?);
    }
    let expected_alarms = sim.spec().alarms.iter().map(|a| a.per_year).sum::<f64>() * s.load * s.horizon
        / crate::sim::YEAR_MINUTES;
    let mut forecast = Forecast {
        machine: sim.spec().item.clone(),
        from: now,
        horizon: s.horizon,
        load: s.load,
        threshold: WEAR_THRESHOLD,
        wear_trajectory: vec![point(&sim, now)],
        time_to_threshold,
        predicted_alarms: Vec::new(),
        expected_alarms,
        predicted_throughput: 0.0,
    };
    if s.horizon == 0.0 {
        return Ok(forecast);
    }
    let step = s.step.unwrap_or(s.horizon / 20.0);
    if !(step > 0.0 && step.is_finite()) {
        return Err(TwinError::BadRequest(format!("step {step} must be > 0")));
    }
    let mut elapsed = 0.0;
    while elapsed < s.horizon {
        let dt = step.min(s.horizon - elapsed);
        let out = sim.tick(dt)?;
        elapsed += dt;
        forecast.predicted_throughput += out.produced_units;
        forecast.predicted_alarms.extend(out.alarms.into_iter().map(|mut a| {
            a.raised_at += now;
            a
        }));
        forecast.wear_trajectory.push(point(&sim, now + elapsed));
    }
    Ok(forecast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::machine::tests::fin_tube_spec;

    fn run(load: f64, horizon: f64) -> Forecast {
        let wear = vec![("safety switch".to_string(), 0.8), ("feed rollers".to_string(), 0.1)];
        let s = PrognosisScenario {
            load,
            horizon,
            step: None,
            seed: None,
        };
        prognose(&fin_tube_spec(), &wear, 100.0, &s, 1).unwrap()
    }

    #[test]
    fn zero_load_is_flat() {
        let f = run(0.0, 10_000.0);
        assert!(f.predicted_alarms.is_empty());
        assert_eq!(f.predicted_throughput, 0.0);
        let first = &f.wear_trajectory[0].wear;
        assert!(f.wear_trajectory.iter().all(|p| &p.wear == first));
        assert_eq!(f.time_to_threshold["feed rollers"], None);
    }

    #[test]
    fn zero_horizon_echoes_state() {
        let f = run(0.7, 0.0);
        assert_eq!(f.wear_trajectory.len(), 1);
        assert_eq!(f.wear_trajectory[0].t, 100.0);
        assert_eq!(f.wear_trajectory[0].wear["safety switch"], 0.8);
        assert_eq!(f.predicted_throughput, 0.0);
    }

    #[test]
    fn time_to_threshold_matches_trajectory() {
        let f = run(1.0, 20_000.0);
        // safety switch: (0.9 - 0.8) / 1e-5 = 10 000 min.
        let ttt = f.time_to_threshold["safety switch"].unwrap();
        assert!((ttt - 10_000.0).abs() < 1e-6);
        let at = f.wear_trajectory.iter().find(|p| p.t >= 100.0 + ttt).unwrap();
        assert!(at.wear["safety switch"] >= WEAR_THRESHOLD - 1e-9);
        assert!(f.predicted_throughput > 0.0);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let s = PrognosisScenario {
            load: 1.5,
            horizon: 1.0,
            step: None,
            seed: None,
        };
        assert!(prognose(&fin_tube_spec(), &[], 0.0, &s, 0).is_err());
        let wear = vec![("nope".to_string(), 0.1)];
        let s = PrognosisScenario { load: 0.5, ..s };
        assert!(prognose(&fin_tube_spec(), &wear, 0.0, &s, 0).is_err());
    }
}
