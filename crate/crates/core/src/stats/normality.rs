//! Anderson-Darling test for normality with mean and variance estimated
//! from the sample.

use serde::{Deserialize, Serialize};

use super::dist::{norm_cdf, norm_sf};
use super::summary::{mean, variance};
use super::{SampleGroup, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    /// Unadjusted statistic A².
    pub a_squared: f64,
    /// Small-sample adjusted statistic A*² = A²(1 + 0.75/n + 2.25/n²).
    pub a_squared_adjusted: f64,
    pub p_value: f64,
}

impl NormalityResult {
    /// Standard decision rule: normality is rejected when `p < alpha`.
    pub fn rejects_normality(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// p-value of the adjusted statistic (D'Agostino & Stephens, case 3).
pub fn ad_p_value(a_star: f64) -> f64 {
    let a = a_star;
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    p.clamp(0.0, 1.0)
}

pub const AD_MIN_N: usize = 8;

pub fn anderson_darling(g: &SampleGroup) -> Result<NormalityResult, StatsError> {
    g.require(AD_MIN_N)?;
    let xs = g.values();
    let n = xs.len();
    let nf = n as f64;
    let m = mean(xs);
    let sd = variance(xs).sqrt();
    if sd <= 0.0 {
        return Err(StatsError::DegenerateSample(g.label().to_string()));
    }
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);

    let mut s = 0.0;
    for i in 0..n {
        let lower = norm_cdf(z[i]).ln();
        let upper = norm_sf(z[n - 1 - i]).ln();
        s += (2.0 * i as f64 + 1.0) * (lower + upper);
    }
    let a2 = -nf - s / nf;
    let a_star = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    Ok(NormalityResult {
        a_squared: a2,
        a_squared_adjusted: a_star,
        p_value: ad_p_value(a_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::dist::norm_quantile;

    #[test]
    fn p_value_branches_are_continuous_enough() {
        for cut in [0.2, 0.34, 0.6] {
            let below = ad_p_value(cut - 1e-9);
            let above = ad_p_value(cut);
            assert!((below - above).abs() < 0.01, "{cut}: {below} vs {above}");
        }
    }

    #[test]
    fn normal_quantile_grid_is_accepted() {
        let n = 50;
        let xs: Vec<f64> = (1..=n)
            .map(|i| norm_quantile((i as f64 - 0.5) / n as f64))
            .collect();
        let r = anderson_darling(&SampleGroup::new("grid", xs).unwrap()).unwrap();
        assert!(r.p_value > 0.2, "{r:?}");
    }

    #[test]
    fn needs_eight_observations() {
        let g = SampleGroup::new("g", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        assert!(matches!(
            anderson_darling(&g),
            Err(StatsError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn exponential_like_sample_is_rejected() {
        let xs: Vec<f64> = (1..=60).map(|i| -(1.0 - i as f64 / 61.0).ln()).collect();
        let r = anderson_darling(&SampleGroup::new("exp", xs).unwrap()).unwrap();
        assert!(r.rejects_normality(0.05), "{r:?}");
    }
}
