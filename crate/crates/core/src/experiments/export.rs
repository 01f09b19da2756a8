//! Plot data for trained kernels.

use crate::error::Result;
use crate::kernel::{spectral_density, KernelSpec};

/// Number of frequency samples in a spectral-density export.
pub const SPECTRUM_POINTS: usize = 1000;
/// Number of lag samples in a correlation export.
pub const CORRELATION_POINTS: usize = 501;
/// Lower clamp applied to exported log densities.
pub const LOG_DENSITY_FLOOR: f64 = -30.0;

/// Upper end of the exported frequency range: `1.25·max(nyquist, max |μ|)`.
pub fn spectrum_upper(spec: &KernelSpec, nyquist: f64) -> f64 {
    1.25 * nyquist.max(max_frequency(spec))
}

fn max_frequency(spec: &KernelSpec) -> f64 {
    match spec {
        KernelSpec::SpectralMixture(p) => p
            .means
            .iter()
            .flat_map(|m| m.iter().map(|v| v.abs()))
            .fold(0.0, f64::max),
        KernelSpec::Periodic { frequency, .. } => frequency.abs(),
        KernelSpec::Scaled { inner, .. } => max_frequency(inner),
        KernelSpec::Sum(terms) => terms.iter().map(max_frequency).fold(0.0, f64::max),
        _ => 0.0,
    }
}

/// Spectral density at `s` for a 1-D kernel. Closed forms are used where
/// available; other kernels fall back to the cosine transform
/// `2∫₀ᵀ k(τ) cos(2πsτ) dτ` over `[0, window]` by Simpson's rule.
pub fn spectral_density_1d(spec: &KernelSpec, s: f64, window: f64, intervals: usize) -> Result<f64> {
    match spectral_density(spec, &[s]) {
        Ok(v) => Ok(v),
        Err(crate::Error::Unsupported(_)) => cosine_transform(spec, s, window, intervals),
        Err(e) => Err(e),
    }
}

fn cosine_transform(spec: &KernelSpec, s: f64, window: f64, intervals: usize) -> Result<f64> {
    let n = intervals + intervals % 2;
    let h = window / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let tau = i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * spec.eval_lag(&[tau]) * (2.0 * std::f64::consts::PI * s * tau).cos();
    }
    Ok(2.0 * acc * h / 3.0)
}

/// `(freq, log density)` on an even grid of `SPECTRUM_POINTS` points over
/// `[0, spectrum_upper]`. `window` is the lag range of the numerical
/// fallback (the training input range).
pub fn spectrum_samples(spec: &KernelSpec, nyquist: f64, window: f64) -> Result<Vec<(f64, f64)>> {
    let upper = spectrum_upper(spec, nyquist);
    let intervals = 4000usize.max((16.0 * window * upper).ceil() as usize);
    (0..SPECTRUM_POINTS)
        .map(|i| {
            let s = upper * i as f64 / (SPECTRUM_POINTS - 1) as f64;
            let d = spectral_density_1d(spec, s, window, intervals)?;
            let logd = if d > 0.0 { d.ln().max(LOG_DENSITY_FLOOR) } else { LOG_DENSITY_FLOOR };
            Ok((s, logd))
        })
        .collect()
}

/// `(τ, k(τ)/k(0))` on an even grid of `CORRELATION_POINTS` lags over
/// `[0, max_lag]`. The first sample is exactly 1.
pub fn correlation_samples(spec: &KernelSpec, max_lag: f64) -> Result<Vec<(f64, f64)>> {
    spec.check_dim(1)?;
    let k0 = spec.eval_lag(&[0.0]);
    (0..CORRELATION_POINTS)
        .map(|i| {
            if i == 0 {
                return Ok((0.0, 1.0));
            }
            let tau = max_lag * i as f64 / (CORRELATION_POINTS - 1) as f64;
            Ok((tau, spec.eval_lag(&[tau]) / k0))
        })
        .collect()
}

/// Local maxima of sampled `(x, value)` pairs, largest value first. An
/// endpoint counts when it exceeds its single neighbour.
pub fn local_peaks(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = samples.len();
    let mut peaks = Vec::new();
    for i in 0..n {
        let v = samples[i].1;
        let left = i == 0 || v > samples[i - 1].1;
        let right = i + 1 == n || v >= samples[i + 1].1;
        if left && right && n > 1 {
            peaks.push(samples[i]);
        }
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks
}

/// Frequency of the largest local maximum.
pub fn dominant_peak(samples: &[(f64, f64)]) -> Option<f64> {
    local_peaks(samples).first().map(|p| p.0)
}
