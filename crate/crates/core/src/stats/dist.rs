//! Distribution functions used by the test battery. Normal, t and F come
//! from `statrs`; the studentized range lives in [`super::tukey`].

use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use statrs::function::erf::erfc;

use super::StatsError;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal upper tail `1 - Φ(z)`, accurate for large `z`.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

fn students_t(df: f64) -> Result<StudentsT, StatsError> {
    if !(df.is_finite() && df > 0.0) {
        return Err(StatsError::InvalidDof(df));
    }
    StudentsT::new(0.0, 1.0, df).map_err(|_| StatsError::InvalidDof(df))
}

pub fn t_cdf(x: f64, df: f64) -> Result<f64, StatsError> {
    Ok(students_t(df)?.cdf(x))
}

/// Upper tail `P(T > x)`.
pub fn t_sf(x: f64, df: f64) -> Result<f64, StatsError> {
    Ok(students_t(df)?.sf(x))
}

pub fn t_quantile(p: f64, df: f64) -> Result<f64, StatsError> {
    Ok(students_t(df)?.inverse_cdf(p))
}

/// Upper tail of the F distribution.
pub fn f_sf(x: f64, df1: f64, df2: f64) -> Result<f64, StatsError> {
    let f = FisherSnedecor::new(df1, df2).map_err(|_| StatsError::InvalidDof(df1.min(df2)))?;
    Ok(f.sf(x).clamp(0.0, 1.0))
}
