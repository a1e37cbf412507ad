//! Hypothesis-test battery used to assess the case-study campaigns:
//! Anderson-Darling normality, one-sided two-variance tests (Bonett and
//! Levene), one-way ANOVA, Games-Howell pairwise comparisons and Fisher's
//! LSD. Everything here is a pure function of its input.

mod anova;
pub mod dist;
mod lsd;
mod normality;
mod posthoc;
mod summary;
pub mod tukey;
mod variance;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use anova::{one_way_anova, AnovaResult};
pub use lsd::{fisher_lsd, lsd_compare, LsdResult};
pub use normality::{ad_p_value, anderson_darling, NormalityResult, AD_MIN_N};
pub use posthoc::{games_howell, games_howell_summaries, GroupSummary, PairwiseComparison};
pub use summary::{mean, median, variance, Summary};
pub use tukey::{ptukey, qtukey};
pub use variance::{
    bonett, levene_one_sided, levene_test, variance_ratio_test, LeveneCenter, LeveneResult,
    VarianceMethod, VarianceTestResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("group `{label}` has {got} observations, at least {needed} required")]
    TooFewObservations {
        label: String,
        needed: usize,
        got: usize,
    },
    #[error("{got} groups given, at least {needed} required")]
    TooFewGroups { needed: usize, got: usize },
    #[error("group `{0}` contains a non-finite value")]
    NonFinite(String),
    #[error("invalid degrees of freedom {0}")]
    InvalidDof(f64),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// Labelled set of finite observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGroup {
    label: String,
    values: Vec<f64>,
}

impl SampleGroup {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self, StatsError> {
        let label = label.into();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(label));
        }
        Ok(SampleGroup { label, values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn scaled(&self, c: f64) -> SampleGroup {
        SampleGroup {
            label: self.label.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub(crate) fn require(&self, needed: usize) -> Result<(), StatsError> {
        if self.values.len() < needed {
            Err(StatsError::TooFewObservations {
                label: self.label.clone(),
                needed,
                got: self.values.len(),
            })
        } else {
            Ok(())
        }
    }
}
