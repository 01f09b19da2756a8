//! Exact Gaussian-process regression.
//!
//! The log marginal likelihood of centered targets `ỹ` is
//!
//! ```text
//! log p(y|θ) = −½ ỹᵀ(K + σ²I)⁻¹ỹ − ½ log|K + σ²I| − (N/2) log 2π
//! ```
//!
//! and its gradient uses the trace identity
//! `∂/∂θ = ½ tr((ααᵀ − (K + σ²I)⁻¹) ∂K/∂θ)` with `α = (K + σ²I)⁻¹ỹ`.

use std::f64::consts::PI;

use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{mean, Dataset, Inputs};
use crate::error::{Error, Result};
use crate::kernel::{FrequencyTransform, HyperVector, KernelSpec};
use crate::linalg::{Cholesky, JitterPolicy};
use crate::seed;

/// Inference options shared by training and prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpOptions {
    /// Subtract the training-target mean before inference.
    pub center_targets: bool,
    pub jitter: JitterPolicy,
}

impl Default for GpOptions {
    fn default() -> Self {
        GpOptions {
            center_targets: true,
            jitter: JitterPolicy::default(),
        }
    }
}

fn check_inputs(spec: &KernelSpec, x: &Inputs) -> Result<()> {
    spec.check_dim(x.dim())?;
    if let Some(first) = x.rows().next() {
        let first = first.to_vec();
        // integer lags between every pair iff every row is an integer offset from the first
        for row in x.rows() {
            let tau: Vec<f64> = row.iter().zip(&first).map(|(a, b)| a - b).collect();
            spec.check_lag(&tau)?;
        }
    }
    Ok(())
}

/// Cross-covariance matrix `K(X, X2)`.
pub fn build_gram(spec: &KernelSpec, x: &Inputs, x2: &Inputs) -> Result<Mat<f64>> {
    if x.dim() != x2.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: x2.dim(),
        });
    }
    check_inputs(spec, x)?;
    check_inputs(spec, x2)?;
    if let (Some(a), Some(b)) = (x.rows().next(), x2.rows().next()) {
        let tau: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
        spec.check_lag(&tau)?;
    }
    let mut tau = vec![0.0; x.dim()];
    Ok(Mat::from_fn(x.len(), x2.len(), |i, j| {
        for (t, (a, b)) in tau.iter_mut().zip(x.row(i).iter().zip(x2.row(j))) {
            *t = a - b;
        }
        spec.eval_lag(&tau)
    }))
}

/// One-dimensional inputs on a regular grid, `x_i = origin + step·m_i`.
/// Pairwise lags are then `step·|m_i − m_j|` and kernel quantities can be
/// tabulated per lag instead of per pair.
#[derive(Debug, Clone)]
struct LagGrid {
    step: f64,
    index: Vec<usize>,
    max: usize,
}

impl LagGrid {
    /// Reconstruction error allowed, relative to the input magnitude.
    const TOL: f64 = 1e-12;

    fn detect(x: &Inputs) -> Option<LagGrid> {
        let n = x.len();
        if x.dim() != 1 || n < 3 {
            return None;
        }
        let xs = x.as_slice();
        let origin = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let coarse = x.median_spacing(0)?;
        let span = ((top - origin) / coarse).round();
        if !(span >= 1.0 && span <= (4 * n).max(4096) as f64) {
            return None;
        }
        let step = (top - origin) / span;
        let scale = origin.abs().max(top.abs()).max(step);
        let mut index = Vec::with_capacity(n);
        for &v in xs {
            let m = ((v - origin) / step).round();
            if (origin + step * m - v).abs() > Self::TOL * scale {
                return None;
            }
            index.push(m as usize);
        }
        Some(LagGrid {
            step,
            index,
            max: span as usize,
        })
    }

    fn lag(&self, i: usize, j: usize) -> usize {
        self.index[i].abs_diff(self.index[j])
    }
}

/// Symmetric `K(X, X)`, evaluating each pair (or each grid lag) once.
fn gram_symmetric(spec: &KernelSpec, x: &Inputs) -> Result<Mat<f64>> {
    check_inputs(spec, x)?;
    let n = x.len();
    if let Some(grid) = LagGrid::detect(x) {
        let table: Vec<f64> = (0..=grid.max).map(|k| spec.eval_lag(&[grid.step * k as f64])).collect();
        return Ok(Mat::from_fn(n, n, |i, j| table[grid.lag(i, j)]));
    }
    let mut k = Mat::zeros(n, n);
    let mut tau = vec![0.0; x.dim()];
    for i in 0..n {
        for j in 0..=i {
            for (t, (a, b)) in tau.iter_mut().zip(x.row(i).iter().zip(x.row(j))) {
                *t = a - b;
            }
            let v = spec.eval_lag(&tau);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

fn add_diagonal(k: &mut Mat<f64>, v: f64) {
    for i in 0..k.nrows() {
        k[(i, i)] += v;
    }
}

fn target_offset(y: &[f64], opts: &GpOptions) -> f64 {
    if opts.center_targets {
        mean(y)
    } else {
        0.0
    }
}

fn check_noise(noise_variance: f64) -> Result<()> {
    if noise_variance.is_finite() && noise_variance >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "noise variance must be ≥ 0, got {noise_variance}"
        )))
    }
}

/// Gaussian log density of `resid` under covariance `cov`, factoring with jitter.
fn gaussian_log_density(cov: &Mat<f64>, resid: &[f64], jitter: JitterPolicy) -> Result<(f64, Cholesky)> {
    let chol = Cholesky::factor(cov, jitter)?;
    let sol = chol.solve(resid);
    let quad: f64 = resid.iter().zip(&sol).map(|(a, b)| a * b).sum();
    let n = resid.len() as f64;
    Ok((-0.5 * quad - 0.5 * chol.log_det() - 0.5 * n * (2.0 * PI).ln(), chol))
}

/// Log marginal likelihood of the training targets in `data`.
pub fn log_marginal_likelihood(spec: &KernelSpec, noise_variance: f64, data: &Dataset, opts: &GpOptions) -> Result<f64> {
    check_noise(noise_variance)?;
    if data.is_empty() {
        return Err(Error::Data("marginal likelihood needs N ≥ 1".into()));
    }
    let mut k = gram_symmetric(spec, &data.x)?;
    add_diagonal(&mut k, noise_variance);
    let offset = target_offset(&data.y, opts);
    let resid: Vec<f64> = data.y.iter().map(|v| v - offset).collect();
    Ok(gaussian_log_density(&k, &resid, opts.jitter)?.0)
}

/// Log marginal likelihood and its gradient with respect to `hyper.values`
/// (kernel coordinates, then `log σ_n²`).
pub fn lml_and_gradient(hyper: &HyperVector, data: &Dataset, opts: &GpOptions) -> Result<(f64, Vec<f64>)> {
    let (spec, noise) = hyper.unflatten()?;
    if data.is_empty() {
        return Err(Error::Data("marginal likelihood needs N ≥ 1".into()));
    }
    let x = &data.x;
    let n = x.len();
    let mut k = gram_symmetric(&spec, x)?;
    add_diagonal(&mut k, noise);
    let offset = target_offset(&data.y, opts);
    let resid: Vec<f64> = data.y.iter().map(|v| v - offset).collect();
    let (lml, chol) = gaussian_log_density(&k, &resid, opts.jitter)?;
    let alpha = chol.solve(&resid);
    let inv = chol.inverse();

    let n_kernel = spec.num_params();
    let mut grad = vec![0.0; n_kernel + 1];
    let trace_w: f64 = (0..n).map(|i| alpha[i] * alpha[i] - inv[(i, i)]).sum();
    if let Some(grid) = LagGrid::detect(x) {
        let mut bucket = vec![0.0; grid.max + 1];
        for i in 0..n {
            bucket[0] += 0.5 * (alpha[i] * alpha[i] - inv[(i, i)]);
            for j in 0..i {
                bucket[grid.lag(i, j)] += alpha[i] * alpha[j] - inv[(i, j)];
            }
        }
        for (k, w) in bucket.iter().enumerate() {
            if *w != 0.0 {
                spec.accumulate_gradient(&[grid.step * k as f64], *w, &mut grad[..n_kernel]);
            }
        }
    } else {
        let mut tau = vec![0.0; x.dim()];
        for i in 0..n {
            let xi = x.row(i);
            for j in 0..=i {
                let w = alpha[i] * alpha[j] - inv[(i, j)];
                let weight = if i == j { 0.5 * w } else { w };
                for (t, (a, b)) in tau.iter_mut().zip(xi.iter().zip(x.row(j))) {
                    *t = a - b;
                }
                spec.accumulate_gradient(&tau, weight, &mut grad[..n_kernel]);
            }
        }
    }
    grad[n_kernel] = 0.5 * noise * trace_w;
    for (g, c) in grad.iter_mut().zip(hyper.chain_factors(&hyper.values)) {
        *g *= c;
    }
    if !lml.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("non-finite marginal likelihood or gradient".into()));
    }
    Ok((lml, grad))
}

/// Gradient of the log marginal likelihood over the default (unconstrained
/// frequency) coordinates: kernel parameters in canonical order, then `log σ_n²`.
pub fn lml_gradient(spec: &KernelSpec, noise_variance: f64, data: &Dataset, opts: &GpOptions) -> Result<Vec<f64>> {
    let hyper = HyperVector::flatten(spec, noise_variance, FrequencyTransform::Unconstrained)?;
    Ok(lml_and_gradient(&hyper, data, opts)?.1)
}

/// Predictive means and marginal variances at a set of test inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDistribution {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Whether `variance` includes the observation noise.
    pub includes_noise: bool,
}

impl PredictiveDistribution {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn stdev(&self) -> Vec<f64> {
        self.variance.iter().map(|v| v.sqrt()).collect()
    }

    /// `mean − 2·stdev`.
    pub fn lower(&self) -> Vec<f64> {
        self.mean.iter().zip(self.stdev()).map(|(m, s)| m - 2.0 * s).collect()
    }

    /// `mean + 2·stdev`.
    pub fn upper(&self) -> Vec<f64> {
        self.mean.iter().zip(self.stdev()).map(|(m, s)| m + 2.0 * s).collect()
    }
}

/// Trained model state; immutable once built.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    spec: KernelSpec,
    noise_variance: f64,
    x: Inputs,
    chol: Option<Cholesky>,
    alpha: Vec<f64>,
    offset: f64,
    log_marginal_likelihood: Option<f64>,
    opts: GpOptions,
}

impl GpPosterior {
    pub fn fit(spec: KernelSpec, noise_variance: f64, data: &Dataset, opts: GpOptions) -> Result<Self> {
        check_noise(noise_variance)?;
        spec.validate()?;
        if data.is_empty() {
            return Ok(GpPosterior::prior(spec, noise_variance, data.dim(), 0.0, opts));
        }
        let mut k = gram_symmetric(&spec, &data.x)?;
        add_diagonal(&mut k, noise_variance);
        let offset = target_offset(&data.y, &opts);
        let resid: Vec<f64> = data.y.iter().map(|v| v - offset).collect();
        let (lml, chol) = gaussian_log_density(&k, &resid, opts.jitter)?;
        let alpha = chol.solve(&resid);
        Ok(GpPosterior {
            spec,
            noise_variance,
            x: data.x.clone(),
            chol: Some(chol),
            alpha,
            offset,
            log_marginal_likelihood: Some(lml),
            opts,
        })
    }

    /// A posterior with no training data: the prior shifted by `offset`.
    pub fn prior(spec: KernelSpec, noise_variance: f64, dim: usize, offset: f64, opts: GpOptions) -> Self {
        GpPosterior {
            spec,
            noise_variance,
            x: Inputs::empty(dim),
            chol: None,
            alpha: Vec::new(),
            offset,
            log_marginal_likelihood: None,
            opts,
        }
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn options(&self) -> &GpOptions {
        &self.opts
    }

    pub fn train_inputs(&self) -> &Inputs {
        &self.x
    }

    pub fn cholesky(&self) -> Option<&Cholesky> {
        self.chol.as_ref()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Log marginal likelihood of the training targets (absent for a prior).
    pub fn log_marginal_likelihood(&self) -> Option<f64> {
        self.log_marginal_likelihood
    }

    fn cross_solve(&self, xstar: &Inputs) -> Result<(Mat<f64>, Option<Mat<f64>>)> {
        let kx = build_gram(&self.spec, &self.x, xstar)?;
        let v = self.chol.as_ref().map(|c| c.solve_lower(&kx));
        Ok((kx, v))
    }

    fn means(&self, kx: &Mat<f64>, m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| self.offset + (0..self.alpha.len()).map(|i| kx[(i, j)] * self.alpha[i]).sum::<f64>())
            .collect()
    }

    pub fn predict(&self, xstar: &Inputs, include_noise: bool) -> Result<PredictiveDistribution> {
        if xstar.dim() != self.x.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.x.dim(),
                found: xstar.dim(),
            });
        }
        check_inputs(&self.spec, xstar)?;
        let m = xstar.len();
        let (kx, v) = self.cross_solve(xstar)?;
        let mean = self.means(&kx, m);
        let prior_var = self.spec.variance(xstar.dim());
        let noise = if include_noise { self.noise_variance } else { 0.0 };
        let variance = (0..m)
            .map(|j| {
                let explained = v
                    .as_ref()
                    .map_or(0.0, |v| (0..v.nrows()).map(|i| v[(i, j)] * v[(i, j)]).sum::<f64>());
                (prior_var - explained).max(0.0) + noise
            })
            .collect();
        Ok(PredictiveDistribution {
            mean,
            variance,
            includes_noise: include_noise,
        })
    }

    /// Joint predictive mean and covariance at `xstar`.
    pub fn predictive_covariance(&self, xstar: &Inputs, include_noise: bool) -> Result<(Vec<f64>, Mat<f64>)> {
        if xstar.dim() != self.x.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.x.dim(),
                found: xstar.dim(),
            });
        }
        let m = xstar.len();
        let (kx, v) = self.cross_solve(xstar)?;
        let mean = self.means(&kx, m);
        let mut cov = gram_symmetric(&self.spec, xstar)?;
        if let Some(v) = v {
            cov -= v.transpose() * &v;
        }
        if include_noise {
            add_diagonal(&mut cov, self.noise_variance);
        }
        Ok((mean, cov))
    }

    /// Joint Gaussian log density of `ystar` under the noisy predictive distribution.
    pub fn log_predictive_density(&self, xstar: &Inputs, ystar: &[f64]) -> Result<f64> {
        if ystar.is_empty() {
            return Err(Error::EmptyTestSet);
        }
        if ystar.len() != xstar.len() {
            return Err(Error::DimensionMismatch {
                expected: xstar.len(),
                found: ystar.len(),
            });
        }
        let (mean, cov) = self.predictive_covariance(xstar, true)?;
        let resid: Vec<f64> = ystar.iter().zip(&mean).map(|(y, m)| y - m).collect();
        Ok(gaussian_log_density(&cov, &resid, self.opts.jitter)?.0)
    }

    /// Sum of per-point Gaussian log densities under the noisy marginals.
    pub fn log_predictive_density_pointwise(&self, xstar: &Inputs, ystar: &[f64]) -> Result<f64> {
        if ystar.is_empty() {
            return Err(Error::EmptyTestSet);
        }
        let pred = self.predict(xstar, true)?;
        Ok(pred
            .mean
            .iter()
            .zip(&pred.variance)
            .zip(ystar)
            .map(|((m, v), y)| -0.5 * (y - m).powi(2) / v - 0.5 * (2.0 * PI * v).ln())
            .sum())
    }
}

/// One zero-mean draw of `f(X) + ε` from the prior.
pub fn sample_prior(spec: &KernelSpec, x: &Inputs, noise_variance: f64, seed: u64, jitter: JitterPolicy) -> Result<Vec<f64>> {
    Ok(sample_prior_many(spec, x, noise_variance, seed, jitter, 1)?.remove(0))
}

/// `count` independent prior draws sharing one factorization.
pub fn sample_prior_many(
    spec: &KernelSpec,
    x: &Inputs,
    noise_variance: f64,
    seed: u64,
    jitter: JitterPolicy,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    check_noise(noise_variance)?;
    let mut k = gram_symmetric(spec, x)?;
    add_diagonal(&mut k, noise_variance);
    let chol = Cholesky::factor(&k, jitter)?;
    let mut rng = seed::rng(seed);
    Ok((0..count)
        .map(|_| {
            let z: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            chol.mul_lower(&z)
        })
        .collect())
}
