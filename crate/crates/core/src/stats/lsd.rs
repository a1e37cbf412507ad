//! Fisher's least significant difference.

use serde::{Deserialize, Serialize};

use super::dist::t_quantile;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsdResult {
    pub lsd: f64,
    pub alpha: f64,
    /// `t(1 − α/2, N − a)`.
    pub t_quantile: f64,
    pub dof: usize,
}

/// `LSD = t(α/2, N − a) · √(2·MS_E / n)`.
pub fn fisher_lsd(
    ms_e: f64,
    n: usize,
    n_total: usize,
    a: usize,
    alpha: f64,
) -> Result<LsdResult, StatsError> {
    if n_total <= a {
        return Err(StatsError::InvalidDof((n_total as f64) - (a as f64)));
    }
    if n == 0 {
        return Err(StatsError::InvalidArgument("group size must be at least 1".into()));
    }
    if !(ms_e.is_finite() && ms_e >= 0.0) {
        return Err(StatsError::InvalidArgument(format!("MS_E {ms_e} must be finite and ≥ 0")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidArgument(format!("alpha {alpha} must lie in (0, 1)")));
    }
    let dof = n_total - a;
    let t = t_quantile(1.0 - alpha / 2.0, dof as f64)?;
    Ok(LsdResult {
        lsd: t * (2.0 * ms_e / n as f64).sqrt(),
        alpha,
        t_quantile: t,
        dof,
    })
}

/// Two means differ significantly when `|mean1 − mean2| > lsd`.
pub fn lsd_compare(mean1: f64, mean2: f64, lsd: f64) -> bool {
    (mean1 - mean2).abs() > lsd
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_matches_hand_value() {
        // t(.975, 98) · √(2·4/50)
        let r = fisher_lsd(4.0, 50, 100, 2, 0.05).unwrap();
        assert_eq!(r.dof, 98);
        assert!((r.lsd - 1.984467454426692 * 0.4).abs() < 1e-10);
    }

    #[test]
    fn zero_difference_never_significant() {
        for lsd in [1e-9, 0.01, 3.0] {
            assert!(!lsd_compare(2.0, 2.0, lsd));
        }
        assert!(lsd_compare(0.18, 0.0, 0.01));
    }

    #[test]
    fn invalid_dof_rejected() {
        assert!(matches!(
            fisher_lsd(1.0, 1, 2, 2, 0.05),
            Err(StatsError::InvalidDof(_))
        ));
    }
}
