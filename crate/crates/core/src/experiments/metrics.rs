//! Test-set scores.

use crate::data::Inputs;
use crate::error::{Error, Result};
use crate::gp::{GpPosterior, PredictiveDistribution};

/// Scores of one trained kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsEntry {
    pub mse: f64,
    /// Joint log predictive density of the test targets.
    pub log_likelihood: f64,
    /// Sum of per-point log predictive densities.
    pub log_likelihood_pointwise: f64,
    /// Fraction of test targets inside mean ± 2·stdev.
    pub coverage: f64,
}

fn check(pred: &PredictiveDistribution, y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if pred.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            found: y.len(),
        });
    }
    Ok(())
}

pub fn mean_squared_error(pred: &PredictiveDistribution, y: &[f64]) -> Result<f64> {
    check(pred, y)?;
    Ok(pred.mean.iter().zip(y).map(|(m, t)| (m - t).powi(2)).sum::<f64>() / y.len() as f64)
}

pub fn band_coverage(pred: &PredictiveDistribution, y: &[f64]) -> Result<f64> {
    check(pred, y)?;
    let inside = pred
        .lower()
        .iter()
        .zip(pred.upper())
        .zip(y)
        .filter(|&((lo, hi), &t)| *lo <= t && t <= hi)
        .count();
    Ok(inside as f64 / y.len() as f64)
}

/// MSE on the raw target scale, joint and pointwise log predictive density
/// (observation noise included), and two-sigma band coverage.
pub fn compute_metrics(posterior: &GpPosterior, xstar: &Inputs, ystar: &[f64]) -> Result<MetricsEntry> {
    if ystar.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let pred = posterior.predict(xstar, true)?;
    Ok(MetricsEntry {
        mse: mean_squared_error(&pred, ystar)?,
        log_likelihood: posterior.log_predictive_density(xstar, ystar)?,
        log_likelihood_pointwise: posterior.log_predictive_density_pointwise(xstar, ystar)?,
        coverage: band_coverage(&pred, ystar)?,
    })
}
