//! Games-Howell pairwise comparisons from raw groups or from summary
//! statistics.

use serde::{Deserialize, Serialize};

use super::summary::{mean, variance};
use super::tukey::{ptukey, qtukey};
use super::{SampleGroup, StatsError};

/// `(mean, sd, n)` of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl GroupSummary {
    pub fn new(label: impl Into<String>, mean: f64, sd: f64, n: usize) -> Self {
        GroupSummary {
            label: label.into(),
            mean,
            sd,
            n,
        }
    }

    pub fn of(g: &SampleGroup) -> Self {
        GroupSummary::new(g.label(), mean(g.values()), variance(g.values()).sqrt(), g.n())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub first: String,
    pub second: String,
    /// `mean(second) − mean(first)`.
    pub diff: f64,
    pub se: f64,
    pub t_value: f64,
    pub df: f64,
    pub critical: f64,
    pub ci: (f64, f64),
    pub adjusted_p: f64,
}

pub fn games_howell_summaries(
    groups: &[GroupSummary],
    alpha: f64,
) -> Result<Vec<PairwiseComparison>, StatsError> {
    let a = groups.len();
    if a < 2 {
        return Err(StatsError::TooFewGroups { needed: 2, got: a });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidArgument(format!("alpha {alpha} must lie in (0, 1)")));
    }
    for g in groups {
        if g.n < 2 {
            return Err(StatsError::TooFewObservations {
                label: g.label.clone(),
                needed: 2,
                got: g.n,
            });
        }
        if !(g.mean.is_finite() && g.sd.is_finite() && g.sd >= 0.0) {
            return Err(StatsError::NonFinite(g.label.clone()));
        }
    }

    let mut out = Vec::with_capacity(a * (a - 1) / 2);
    for i in 0..a {
        for j in i + 1..a {
            let (g1, g2) = (&groups[i], &groups[j]);
            let (n1, n2) = (g1.n as f64, g2.n as f64);
            let (v1, v2) = (g1.sd * g1.sd / n1, g2.sd * g2.sd / n2);
            let se = (v1 + v2).sqrt();
            if se == 0.0 {
                return Err(StatsError::DegenerateSample(format!(
                    "{} / {}",
                    g1.label, g2.label
                )));
            }
            let df = (v1 + v2).powi(2) / (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0));
            let diff = g2.mean - g1.mean;
            let t = diff / se;
            let critical = qtukey(1.0 - alpha, a, df)? / std::f64::consts::SQRT_2;
            let p = 1.0 - ptukey(t.abs() * std::f64::consts::SQRT_2, a, df)?;
            out.push(PairwiseComparison {
                first: g1.label.clone(),
                second: g2.label.clone(),
                diff,
                se,
                t_value: t,
                df,
                critical,
                ci: (diff - critical * se, diff + critical * se),
                adjusted_p: p.clamp(0.0, 1.0),
            });
        }
    }
    Ok(out)
}

pub fn games_howell(
    groups: &[SampleGroup],
    alpha: f64,
) -> Result<Vec<PairwiseComparison>, StatsError> {
    let summaries: Vec<GroupSummary> = groups.iter().map(GroupSummary::of).collect();
    games_howell_summaries(&summaries, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::dist::t_quantile;

    #[test]
    fn fin_tube_summaries() {
        let r = games_howell_summaries(
            &[
                GroupSummary::new("before", 83.34, 36.25, 50),
                GroupSummary::new("after", 6.25, 4.02, 50),
            ],
            0.05,
        )
        .unwrap();
        let c = &r[0];
        assert!((c.diff + 77.09).abs() < 1e-9);
        assert!((c.t_value + 14.945858).abs() < 1e-5);
        assert!((c.df - 50.205026).abs() < 1e-5);
        assert!((c.critical - 2.0083558995).abs() < 1e-6);
        assert!(((c.ci.1 - c.ci.0) / 2.0 - 10.359001).abs() < 1e-4);
        assert!(c.adjusted_p < 1e-6);
    }

    #[test]
    fn two_group_critical_is_welch_t() {
        let r = games_howell_summaries(
            &[GroupSummary::new("a", 1.0, 2.0, 12), GroupSummary::new("b", 2.0, 5.0, 7)],
            0.05,
        )
        .unwrap();
        let t = t_quantile(0.975, r[0].df).unwrap();
        assert!((r[0].critical - t).abs() < 1e-6);
    }

    #[test]
    fn equal_summaries_centre_the_interval() {
        let g = GroupSummary::new("a", 10.0, 3.0, 20);
        let r = games_howell_summaries(&[g.clone(), g], 0.05).unwrap();
        assert_eq!(r[0].diff, 0.0);
        assert!((r[0].ci.0 + r[0].ci.1).abs() < 1e-12);
        assert!((r[0].adjusted_p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_groups_give_three_pairs() {
        let r = games_howell_summaries(
            &[
                GroupSummary::new("a", 1.0, 1.0, 10),
                GroupSummary::new("b", 2.0, 1.0, 10),
                GroupSummary::new("c", 4.0, 2.0, 10),
            ],
            0.05,
        )
        .unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|c| c.ci.0 <= c.diff && c.diff <= c.ci.1));
    }
}
