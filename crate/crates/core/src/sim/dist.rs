//! Time distributions.
//!
//! All durations are lognormal, parameterised by the target mean and
//! standard deviation of the minutes themselves. Campaign generators use
//! [`LogNormalTime::stratified`]: one uniform draw per equal-probability
//! stratum (Latin hypercube in one dimension), mapped through the lognormal
//! quantile and shuffled. Each value is still random, but the sample covers
//! the distribution evenly, so a sample of 50 has a mean much closer to the
//! target than 50 independent draws would.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::stats::dist::norm_quantile;

pub type SimRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Seed for an independent sub-stream named `label` (FNV-1a, then a
/// splitmix finaliser).
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalTime {
    pub mean: f64,
    pub sd: f64,
}

impl LogNormalTime {
    pub fn new(mean: f64, sd: f64) -> Result<Self, SimError> {
        if !(mean > 0.0 && mean.is_finite() && sd >= 0.0 && sd.is_finite()) {
            return Err(SimError::InvalidDistribution { mean, sd });
        }
        Ok(LogNormalTime { mean, sd })
    }

    /// `(mu, sigma)` of the underlying normal.
    pub fn log_params(&self) -> (f64, f64) {
        let s2 = (1.0 + (self.sd / self.mean).powi(2)).ln();
        (self.mean.ln() - s2 / 2.0, s2.sqrt())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let (mu, sigma) = self.log_params();
        if sigma == 0.0 {
            return self.mean;
        }
        LogNormal::new(mu, sigma).expect("valid lognormal").sample(rng)
    }

    pub fn iid(&self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let (mu, sigma) = self.log_params();
        (mu + sigma * norm_quantile(p)).exp()
    }

    pub fn stratified(&self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        let mut out: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + rng.random::<f64>()) / n as f64;
                self.quantile(u.clamp(1e-12, 1.0 - 1e-12))
            })
            .collect();
        out.shuffle(rng);
        out
    }
}

/// How a campaign draws its durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Stratified,
    Iid,
}

impl Sampling {
    pub fn draw(self, d: &LogNormalTime, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            Sampling::Stratified => d.stratified(n, rng),
            Sampling::Iid => d.iid(n, rng),
        }
    }
}
