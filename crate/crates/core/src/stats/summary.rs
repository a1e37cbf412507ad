use serde::{Deserialize, Serialize};

use super::dist::t_quantile;
use super::{SampleGroup, StatsError};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (divisor n − 1).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Quantile at position `(n + 1)·p` of the sorted sample with linear
/// interpolation, clamped to the extremes.
fn quantile_n_plus_1(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = (n as f64 + 1.0) * p;
    if pos <= 1.0 {
        return sorted[0];
    }
    if pos >= n as f64 {
        return sorted[n - 1];
    }
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
}

/// Descriptive block reported per group alongside the tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// 95% t-interval for the mean.
    pub ci95: (f64, f64),
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Adjusted Fisher-Pearson skewness G1.
    pub skewness: f64,
}

impl Summary {
    pub fn of(g: &SampleGroup) -> Result<Summary, StatsError> {
        g.require(3)?;
        let xs = g.values();
        let n = xs.len();
        let nf = n as f64;
        let m = mean(xs);
        let sd = variance(xs).sqrt();
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let half = t_quantile(0.975, nf - 1.0)? * sd / nf.sqrt();
        let skewness = if sd > 0.0 {
            let s3: f64 = xs.iter().map(|x| ((x - m) / sd).powi(3)).sum();
            nf / ((nf - 1.0) * (nf - 2.0)) * s3
        } else {
            0.0
        };
        Ok(Summary {
            n,
            mean: m,
            sd,
            ci95: (m - half, m + half),
            min: sorted[0],
            q1: quantile_n_plus_1(&sorted, 0.25),
            median: median(&sorted),
            q3: quantile_n_plus_1(&sorted, 0.75),
            max: sorted[n - 1],
            skewness,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_use_n_plus_one_positions() {
        let g = SampleGroup::new("g", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let s = Summary::of(&g).unwrap();
        // positions 2.25 and 6.75
        assert!((s.q1 - 2.25).abs() < 1e-12);
        assert!((s.q3 - 6.75).abs() < 1e-12);
        assert_eq!(s.median, 4.5);
        assert_eq!(s.skewness, 0.0);
    }

    #[test]
    fn ci_matches_t_interval() {
        let g = SampleGroup::new("g", vec![2.0, 4.0, 6.0]).unwrap();
        let s = Summary::of(&g).unwrap();
        // t(.975, 2) = 4.302652729911275, sd = 2
        let half = 4.302652729911275 * 2.0 / 3f64.sqrt();
        assert!((s.ci95.1 - (4.0 + half)).abs() < 1e-9);
    }

    #[test]
    fn skewness_sign() {
        let g = SampleGroup::new("g", vec![1.0, 1.0, 1.0, 2.0, 10.0]).unwrap();
        assert!(Summary::of(&g).unwrap().skewness > 0.0);
    }
}
