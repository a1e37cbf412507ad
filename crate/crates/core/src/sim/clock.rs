use serde::{Deserialize, Serialize};

use super::SimError;

/// Logical simulation time in minutes. Only moves forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    now: f64,
    seed: u64,
}

impl SimClock {
    pub fn new(seed: u64) -> Self {
        SimClock { now: 0.0, seed }
    }

    pub fn starting_at(seed: u64, now: f64) -> Self {
        SimClock { now, seed }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn advance(&mut self, dt: f64) -> Result<f64, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidStep(dt));
        }
        self.now += dt;
        Ok(self.now)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_forward() {
        let mut c = SimClock::new(1);
        assert_eq!(c.advance(2.5).unwrap(), 2.5);
        assert!(c.advance(0.0).is_err());
        assert!(c.advance(-1.0).is_err());
        assert!(c.advance(f64::INFINITY).is_err());
        assert_eq!(c.now(), 2.5);
    }
}
