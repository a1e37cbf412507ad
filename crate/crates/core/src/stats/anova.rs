use serde::{Deserialize, Serialize};

use super::dist::f_sf;
use super::summary::mean;
use super::{SampleGroup, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p_value: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub df_between: usize,
    pub df_within: usize,
    /// Mean square error, `SS_within / (N − a)`.
    pub ms_e: f64,
    /// Total number of observations.
    pub n_total: usize,
    /// Number of groups.
    pub a: usize,
    pub group_means: Vec<f64>,
}

pub fn one_way_anova(groups: &[SampleGroup]) -> Result<AnovaResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups {
            needed: 2,
            got: groups.len(),
        });
    }
    for g in groups {
        g.require(2)?;
    }
    let n_total: usize = groups.iter().map(SampleGroup::n).sum();
    let a = groups.len();
    let grand = groups.iter().flat_map(|g| g.values()).sum::<f64>() / n_total as f64;
    let group_means: Vec<f64> = groups.iter().map(|g| mean(g.values())).collect();
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for (g, m) in groups.iter().zip(&group_means) {
        ss_between += g.n() as f64 * (m - grand).powi(2);
        ss_within += g.values().iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let df_between = a - 1;
    let df_within = n_total - a;
    let ms_e = ss_within / df_within as f64;
    let ms_b = ss_between / df_between as f64;

    let (f, p_value) = if ss_between == 0.0 {
        (0.0, 1.0)
    } else if ms_e == 0.0 {
        return Err(StatsError::DegenerateSample(
            "zero within-group variance with distinct group means".into(),
        ));
    } else {
        let f = ms_b / ms_e;
        (f, f_sf(f, df_between as f64, df_within as f64)?)
    };
    Ok(AnovaResult {
        f,
        p_value,
        ss_between,
        ss_within,
        df_between,
        df_within,
        ms_e,
        n_total,
        a,
        group_means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(label: &str, xs: &[f64]) -> SampleGroup {
        SampleGroup::new(label, xs.to_vec()).unwrap()
    }

    #[test]
    fn hand_computed_three_plus_three() {
        // Grand mean 3.5; SS_B = 3·(1.5² + 1.5²) = 13.5; SS_W = 2 + 2 = 4.
        let r = one_way_anova(&[g("a", &[1.0, 2.0, 3.0]), g("b", &[4.0, 5.0, 6.0])]).unwrap();
        assert_eq!(r.ss_between, 13.5);
        assert_eq!(r.ss_within, 4.0);
        assert_eq!(r.ms_e, 1.0);
        assert_eq!(r.f, 13.5);
        assert_eq!((r.df_between, r.df_within, r.n_total, r.a), (1, 4, 6, 2));
        assert!((r.p_value - 0.02131164112875672).abs() < 1e-9);
    }

    #[test]
    fn identical_groups_give_zero() {
        let xs = [1.0, 5.0, 2.0];
        let r = one_way_anova(&[g("a", &xs), g("b", &xs)]).unwrap();
        assert_eq!(r.f, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn needs_two_groups() {
        assert!(matches!(
            one_way_anova(&[g("a", &[1.0, 2.0])]),
            Err(StatsError::TooFewGroups { .. })
        ));
    }
}
