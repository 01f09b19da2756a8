use crate::error::{Error, Result};

/// Biased sample autocorrelation `r(h)` for `h = 0..=max_lag`.
///
/// The series is mean-removed and every lag is divided by `Σ(y_t − ȳ)²`,
/// which keeps the implied autocovariance sequence positive semidefinite.
pub fn empirical_autocorrelation(y: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "autocorrelation needs at least 2 values, got {}",
            y.len()
        )));
    }
    if max_lag >= y.len() {
        return Err(Error::InvalidParameter(format!(
            "max lag {max_lag} must be below the series length {}",
            y.len()
        )));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    let scale: f64 = y.iter().map(|v| v * v).sum();
    if denom <= 1e-24 * scale {
        return Err(Error::DegenerateInput("series has zero variance".into()));
    }
    Ok((0..=max_lag)
        .map(|h| {
            centered
                .iter()
                .zip(&centered[h..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / denom
        })
        .collect())
}
