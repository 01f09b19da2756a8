//! Synthetic datasets.

use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, Inputs};
use crate::error::{Error, Result};
use crate::gp::sample_prior;
use crate::kernel::{KernelSpec, AR1_DECAY};
use crate::linalg::JitterPolicy;
use crate::seed;

/// Half-width of the held-out sinc window.
pub const SINC_GAP: f64 = 4.5;

/// `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// `sinc(x + 10) + sinc(x) + sinc(x − 10)`.
pub fn sinc_pattern(x: f64) -> f64 {
    sinc(x + 10.0) + sinc(x) + sinc(x - 10.0)
}

/// Noiseless sinc pattern on a uniform grid: `n_test` points inside
/// `[−4.5, 4.5]` held out, `n_train` points continuing the same spacing
/// outward on both sides (half on each). With the defaults 700/300 the
/// grid spacing is 0.03 and the inputs span `(−15, 15)`.
///
/// The targets are deterministic; `seed` is accepted for interface
/// uniformity with the other generators.
pub fn generate_sinc(n_train: usize, n_test: usize, _seed: u64) -> Result<Dataset> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::InvalidParameter("sinc generator needs positive counts".into()));
    }
    let h = 2.0 * SINC_GAP / n_test as f64;
    let n_left = n_train / 2;
    let n_right = n_train - n_left;
    let mut train: Vec<f64> = (0..n_left).rev().map(|k| -SINC_GAP - h * (k as f64 + 0.5)).collect();
    train.extend((0..n_right).map(|k| SINC_GAP + h * (k as f64 + 0.5)));
    let test: Vec<f64> = (0..n_test).map(|j| -SINC_GAP + h * (j as f64 + 0.5)).collect();
    let ty = train.iter().map(|x| sinc_pattern(*x)).collect();
    let sy = test.iter().map(|x| sinc_pattern(*x)).collect();
    Dataset::new(Inputs::from_1d(&train), ty)?.with_test(Inputs::from_1d(&test), sy)
}

/// `n` steps of `y(x+1) = −e^{−0.01} y(x) + σ ε(x)` at `x = 1..=n`,
/// started from the stationary distribution.
pub fn generate_ar1(n: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidParameter("AR(1) generator needs n ≥ 2".into()));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    let phi = -(-AR1_DECAY).exp();
    let stationary_sd = sigma / (1.0 - (-2.0 * AR1_DECAY).exp()).sqrt();
    let mut rng = seed::rng(seed);
    let mut eps = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut y = Vec::with_capacity(n);
    y.push(stationary_sd * eps());
    for t in 1..n {
        let next = phi * y[t - 1] + sigma * eps();
        y.push(next);
    }
    let x: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    Dataset::new(Inputs::from_1d(&x), y)
}

/// One prior draw of `f(X) + ε` with `ε ~ N(0, noise)`.
pub fn generate_from_kernel(spec: &KernelSpec, x: &Inputs, noise: f64, seed: u64) -> Result<Dataset> {
    let y = sample_prior(spec, x, noise, seed, JitterPolicy::default())?;
    Dataset::new(x.clone(), y)
}

/// Matérn-3/2 with `a = 4`, `ℓ = 5`.
pub fn matern_preset() -> KernelSpec {
    KernelSpec::matern32(4.0, 5.0)
}

/// `10·k_RQ + 4·k_PE` with `α = 2`, `ℓ_RQ = 40`, `ω = 1/20`, `ℓ_PE = 1`.
pub fn rqpe_preset() -> KernelSpec {
    KernelSpec::Sum(vec![
        KernelSpec::scaled(10.0, KernelSpec::rq(2.0, 40.0)),
        KernelSpec::scaled(4.0, KernelSpec::periodic(1.0 / 20.0, 1.0)),
    ])
}

/// Integer inputs `1..=n`.
pub fn unit_grid(n: usize) -> Inputs {
    Inputs::from_1d(&(1..=n).map(|i| i as f64).collect::<Vec<_>>())
}
