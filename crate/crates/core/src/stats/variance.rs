//! One-sided two-variance tests of `H0: σ₁²/σ₂² = k` against
//! `H1: σ₁²/σ₂² > k`, plus the k-group Levene test.

use serde::{Deserialize, Serialize};

use super::dist::{f_sf, norm_quantile, norm_sf, t_sf};
use super::summary::{mean, median, variance};
use super::{SampleGroup, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMethod {
    Bonett,
    Levene,
}

/// Centre used for Levene's absolute deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeveneCenter {
    #[default]
    Mean,
    /// Brown-Forsythe variant.
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceTestResult {
    pub method: VarianceMethod,
    /// Bonett: the standardized log-ratio z. Levene: W = t² of the
    /// deviation t-test.
    pub statistic: f64,
    /// Signed statistic the one-sided p is computed from.
    pub signed_statistic: f64,
    pub p_value: f64,
    pub hypothesized_ratio: f64,
}

pub fn variance_ratio_test(
    g1: &SampleGroup,
    g2: &SampleGroup,
    k: f64,
    method: VarianceMethod,
) -> Result<VarianceTestResult, StatsError> {
    match method {
        VarianceMethod::Bonett => bonett(g1, g2, k),
        VarianceMethod::Levene => levene_one_sided(g1, g2, k, LeveneCenter::Mean),
    }
}

fn check_ratio(k: f64) -> Result<(), StatsError> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidArgument(format!(
            "hypothesized ratio {k} must be positive"
        )))
    }
}

/// Mean after trimming `floor(n·p)` observations from each tail with
/// `p = 1 / (2·√(n − 4))`.
fn bonett_trimmed_mean(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n <= 4 {
        return mean(xs);
    }
    let p = 1.0 / (2.0 * ((n - 4) as f64).sqrt());
    let cut = ((n as f64) * p).floor() as usize;
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    mean(&v[cut..n - cut])
}

/// Bonett's kurtosis-adjusted test on the log variance ratio.
pub fn bonett(g1: &SampleGroup, g2: &SampleGroup, k: f64) -> Result<VarianceTestResult, StatsError> {
    g1.require(3)?;
    g2.require(3)?;
    check_ratio(k)?;
    let (x1, x2) = (g1.values(), g2.values());
    let (n1, n2) = (x1.len() as f64, x2.len() as f64);
    let (v1, v2) = (variance(x1), variance(x2));
    if v1 <= 0.0 || v2 <= 0.0 {
        let label = if v1 <= 0.0 { g1.label() } else { g2.label() };
        return Err(StatsError::DegenerateSample(label.to_string()));
    }

    let fourth = |xs: &[f64]| {
        let m = bonett_trimmed_mean(xs);
        xs.iter().map(|x| (x - m).powi(4)).sum::<f64>()
    };
    let squares = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    let ss = squares(x1) + squares(x2);
    let kurt = (n1 + n2) * (fourth(x1) + fourth(x2)) / (ss * ss);

    let se2 = (kurt - (n1 - 3.0) / n1) / (n1 - 1.0) + (kurt - (n2 - 3.0) / n2) / (n2 - 1.0);
    if se2 <= 0.0 {
        return Err(StatsError::DegenerateSample(format!(
            "{} / {}",
            g1.label(),
            g2.label()
        )));
    }
    let z_crit = norm_quantile(0.975);
    let c = (n1 / (n1 - z_crit)) / (n2 / (n2 - z_crit));
    let z = ((c * v1 / v2).ln() - k.ln()) / se2.sqrt();
    Ok(VarianceTestResult {
        method: VarianceMethod::Bonett,
        statistic: z,
        signed_statistic: z,
        p_value: norm_sf(z).clamp(0.0, 1.0),
        hypothesized_ratio: k,
    })
}

fn abs_deviations(xs: &[f64], center: LeveneCenter) -> Vec<f64> {
    let c = match center {
        LeveneCenter::Mean => mean(xs),
        LeveneCenter::Median => median(xs),
    };
    xs.iter().map(|x| (x - c).abs()).collect()
}

/// Two-sample Levene test with a one-sided alternative. Under `H0` the
/// second group's deviations are scaled by `√k` so both groups share a
/// common spread; the pooled t-test on the deviations gives the signed
/// statistic and `W = t²`.
pub fn levene_one_sided(
    g1: &SampleGroup,
    g2: &SampleGroup,
    k: f64,
    center: LeveneCenter,
) -> Result<VarianceTestResult, StatsError> {
    g1.require(3)?;
    g2.require(3)?;
    check_ratio(k)?;
    let d1 = abs_deviations(g1.values(), center);
    let d2: Vec<f64> = abs_deviations(g2.values(), center)
        .into_iter()
        .map(|d| d * k.sqrt())
        .collect();
    let (n1, n2) = (d1.len() as f64, d2.len() as f64);
    let pooled = ((n1 - 1.0) * variance(&d1) + (n2 - 1.0) * variance(&d2)) / (n1 + n2 - 2.0);
    let diff = mean(&d1) - mean(&d2);
    let t = if pooled > 0.0 {
        diff / (pooled * (1.0 / n1 + 1.0 / n2)).sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        return Err(StatsError::DegenerateSample(format!(
            "{} / {}",
            g1.label(),
            g2.label()
        )));
    };
    Ok(VarianceTestResult {
        method: VarianceMethod::Levene,
        statistic: t * t,
        signed_statistic: t,
        p_value: t_sf(t, n1 + n2 - 2.0)?.clamp(0.0, 1.0),
        hypothesized_ratio: k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeveneResult {
    pub w: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
}

/// Classical k-group Levene test (equal variances against any difference).
pub fn levene_test(groups: &[SampleGroup], center: LeveneCenter) -> Result<LeveneResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups {
            needed: 2,
            got: groups.len(),
        });
    }
    for g in groups {
        g.require(2)?;
    }
    let devs: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| abs_deviations(g.values(), center))
        .collect();
    let a = devs.len() as f64;
    let n_total: f64 = devs.iter().map(|d| d.len() as f64).sum();
    let grand = devs.iter().flatten().sum::<f64>() / n_total;
    let mut between = 0.0;
    let mut within = 0.0;
    for d in &devs {
        let m = mean(d);
        between += d.len() as f64 * (m - grand).powi(2);
        within += d.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let df1 = a - 1.0;
    let df2 = n_total - a;
    if within <= 0.0 {
        return Err(StatsError::DegenerateSample("all deviations equal".into()));
    }
    let w = (between / df1) / (within / df2);
    Ok(LeveneResult {
        w,
        df1,
        df2,
        p_value: f_sf(w, df1, df2)?,
    })
}
