//! Starting points for training.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::data::{variance, Dataset};
use crate::error::{Error, Result};
use crate::kernel::{empirical_autocorrelation, KernelSpec, SmParams};
use crate::seed;

/// Baseline kernel families compared against the spectral mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Baseline {
    SquaredExponential,
    Matern,
    RationalQuadratic,
    Periodic,
}

impl Baseline {
    pub fn label(self) -> &'static str {
        match self {
            Baseline::SquaredExponential => "SE",
            Baseline::Matern => "MA",
            Baseline::RationalQuadratic => "RQ",
            Baseline::Periodic => "PE",
        }
    }
}

fn signal_scale(y: &[f64]) -> f64 {
    let v = variance(y);
    if v > 0.0 && v.is_finite() {
        v
    } else {
        1.0
    }
}

/// Nyquist frequency `1/(2·median spacing)` of input column `p`.
pub fn default_nyquist(data: &Dataset, p: usize) -> Result<f64> {
    data.x
        .median_spacing(p)
        .map(|s| 0.5 / s)
        .ok_or_else(|| Error::DegenerateInput("input spacing undefined for fewer than two distinct inputs".into()))
}

/// Random spectral mixture initialization.
///
/// - weights: a uniform draw from the simplex scaled to the target variance;
/// - frequencies: uniform on `[0, nyquist]` per dimension;
/// - length-scales `1/√v`: uniform on `[0.5, 2] × range/Q` per dimension.
pub fn init_sm_random(q: usize, data: &Dataset, seed: u64, nyquist: Option<f64>) -> Result<SmParams> {
    if q == 0 {
        return Err(Error::InvalidParameter("Q must be ≥ 1".into()));
    }
    if data.is_empty() {
        return Err(Error::DegenerateInput("cannot initialize from an empty dataset".into()));
    }
    let dim = data.dim();
    let mut caps = Vec::with_capacity(dim);
    let mut ranges = Vec::with_capacity(dim);
    for p in 0..dim {
        let default = default_nyquist(data, p)?;
        caps.push(nyquist.unwrap_or(default));
        ranges.push(data.x.range(p));
    }
    let mut rng = seed::rng(seed);
    let raw: Vec<f64> = (0..q).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let scale = signal_scale(&data.y);
    let weights = raw.iter().map(|r| scale * r / total).collect();
    let means = (0..q)
        .map(|_| caps.iter().map(|cap| rng.random::<f64>() * cap).collect())
        .collect();
    let variances = (0..q)
        .map(|_| {
            ranges
                .iter()
                .map(|range| {
                    let l = rng.random_range(0.5..2.0) * range / q as f64;
                    1.0 / (l * l)
                })
                .collect()
        })
        .collect();
    SmParams::new(weights, means, variances)
}

/// Lag (in rows) of the highest local maximum of the sample autocorrelation,
/// if one exists with positive correlation.
pub fn dominant_autocorrelation_lag(y: &[f64]) -> Option<usize> {
    let max_lag = y.len().checked_sub(1)?.min(y.len() / 2);
    let r = empirical_autocorrelation(y, max_lag).ok()?;
    (2..max_lag)
        .filter(|&h| r[h] > r[h - 1] && r[h] >= r[h + 1] && r[h] > 0.0)
        .max_by(|&a, &b| r[a].total_cmp(&r[b]))
}

/// Documented deterministic initialization for a baseline kernel.
///
/// Length-scales start at 10% of the input range, amplitudes at the target
/// variance, RQ shape at α = 1, and the periodic frequency at the inverse
/// period of the dominant autocorrelation peak (falling back to 1/range).
pub fn init_baseline(kind: Baseline, data: &Dataset) -> Result<KernelSpec> {
    if data.is_empty() {
        return Err(Error::DegenerateInput("cannot initialize from an empty dataset".into()));
    }
    let range = (0..data.dim()).map(|p| data.x.range(p)).fold(0.0, f64::max);
    let range = if range > 0.0 { range } else { 1.0 };
    let lengthscale = 0.1 * range;
    let amplitude = signal_scale(&data.y);
    Ok(match kind {
        Baseline::SquaredExponential => KernelSpec::scaled(amplitude, KernelSpec::se(lengthscale)),
        Baseline::Matern => KernelSpec::matern32(amplitude, lengthscale),
        Baseline::RationalQuadratic => KernelSpec::scaled(amplitude, KernelSpec::rq(1.0, lengthscale)),
        Baseline::Periodic => {
            let frequency = periodic_frequency(data).unwrap_or(1.0 / range);
            KernelSpec::scaled(amplitude, KernelSpec::periodic(frequency, 1.0))
        }
    })
}

fn periodic_frequency(data: &Dataset) -> Option<f64> {
    if data.dim() != 1 {
        return None;
    }
    let mut rows: Vec<(f64, f64)> = data.x.column(0).into_iter().zip(data.y.iter().copied()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let lag = dominant_autocorrelation_lag(&y)?;
    let spacing = data.x.median_spacing(0)?;
    Some(1.0 / (lag as f64 * spacing))
}
