use std::f64::consts::PI;

use super::{KernelSpec, SmParams};
use crate::error::{Error, Result};

fn gaussian(s: f64, mean: f64, var: f64) -> f64 {
    if var == 0.0 {
        return if s == mean { f64::INFINITY } else { 0.0 };
    }
    (-(s - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

fn sm_density(p: &SmParams, s: &[f64]) -> f64 {
    p.weights
        .iter()
        .zip(p.means.iter().zip(&p.variances))
        .map(|(w, (mu, var))| {
            w * s
                .iter()
                .zip(mu.iter().zip(var))
                .map(|(sd, (m, v))| 0.5 * (gaussian(*sd, *m, *v) + gaussian(*sd, -*m, *v)))
                .product::<f64>()
        })
        .sum()
}

/// Spectral density `S(s)` of a stationary kernel, for the variants with
/// closed forms (SE, SM and their scaled sums).
///
/// For SM the density is the symmetrized Gaussian mixture, taken per
/// dimension so that it is the exact Fourier dual of the product-of-cosines
/// kernel.
pub fn spectral_density(spec: &KernelSpec, s: &[f64]) -> Result<f64> {
    match spec {
        KernelSpec::SquaredExponential { lengthscale } => {
            let l2 = lengthscale * lengthscale;
            let s2: f64 = s.iter().map(|v| v * v).sum();
            Ok((2.0 * PI * l2).powf(s.len() as f64 / 2.0) * (-2.0 * PI * PI * l2 * s2).exp())
        }
        KernelSpec::SpectralMixture(p) => {
            if s.len() != p.dim() {
                return Err(Error::DimensionMismatch {
                    expected: p.dim(),
                    found: s.len(),
                });
            }
            Ok(sm_density(p, s))
        }
        KernelSpec::Scaled { scale, inner } => Ok(scale * spectral_density(inner, s)?),
        KernelSpec::Sum(terms) => terms.iter().map(|t| spectral_density(t, s)).sum(),
        other => Err(Error::Unsupported(format!(
            "no closed-form spectral density for the {} kernel",
            other.family()
        ))),
    }
}

/// Clamps every frequency magnitude to at most `nyquist`, keeping its sign.
pub fn cap_frequencies(params: &SmParams, nyquist: f64) -> Result<SmParams> {
    if !(nyquist.is_finite() && nyquist > 0.0) {
        return Err(Error::InvalidParameter(format!("nyquist must be > 0, got {nyquist}")));
    }
    let mut out = params.clone();
    for m in out.means.iter_mut().flatten() {
        *m = m.signum() * m.abs().min(nyquist);
        if *m == 0.0 {
            *m = 0.0;
        }
    }
    Ok(out)
}
