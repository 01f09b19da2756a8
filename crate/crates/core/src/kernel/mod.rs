//! Stationary covariance kernels.
//!
//! Every kernel is a function of the lag `τ = x − x′`. Parameters are
//! enumerated in a fixed canonical order (see [`KernelSpec::params`]); the
//! gradient routines return derivatives with respect to the *unconstrained*
//! coordinates of those parameters: `log θ` for positive quantities and the
//! raw value for spectral-mixture frequencies.

mod autocorr;
pub mod format;
mod hyper;
mod spectral;

use std::f64::consts::PI;

pub use autocorr::empirical_autocorrelation;
pub use hyper::{FrequencyTransform, HyperVector, Slot};
pub use spectral::{cap_frequencies, spectral_density};

use crate::error::{Error, Result};

/// Fixed decay constant of the alternating AR(1) kernel.
pub const AR1_DECAY: f64 = 0.01;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const TWO_PI_SQ: f64 = 2.0 * PI * PI;
const INTEGER_LAG_TOL: f64 = 1e-9;

/// Spectral mixture hyperparameters: `Q` components over `P` input dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmParams {
    /// One weight per component.
    pub weights: Vec<f64>,
    /// `Q × P` frequency means, in cycles per input unit.
    pub means: Vec<Vec<f64>>,
    /// `Q × P` spectral variances (squared inverse length-scales).
    pub variances: Vec<Vec<f64>>,
}

impl SmParams {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>) -> Result<Self> {
        let p = SmParams {
            weights,
            means,
            variances,
        };
        p.validate()?;
        Ok(p)
    }

    /// Single-component, one-dimensional mixture.
    pub fn single(weight: f64, mean: f64, variance: f64) -> Result<Self> {
        SmParams::new(vec![weight], vec![vec![mean]], vec![vec![variance]])
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.weights.len();
        if q == 0 {
            return Err(Error::InvalidParameter("spectral mixture needs Q ≥ 1".into()));
        }
        let p = self.dim();
        if p == 0 {
            return Err(Error::InvalidParameter("spectral mixture needs P ≥ 1".into()));
        }
        if self.means.len() != q || self.variances.len() != q {
            return Err(Error::InvalidParameter(format!(
                "spectral mixture has {q} weights but {} mean rows and {} variance rows",
                self.means.len(),
                self.variances.len()
            )));
        }
        for (m, v) in self.means.iter().zip(&self.variances) {
            if m.len() != p || v.len() != p {
                return Err(Error::InvalidParameter(
                    "spectral mixture rows must all have length P".into(),
                ));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite frequency".into()));
            }
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidParameter(
                    "spectral variances must be finite and ≥ 0".into(),
                ));
            }
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "spectral weights must be finite and ≥ 0".into(),
            ));
        }
        Ok(())
    }

    /// Components whose weight exceeds `rel · Σw`.
    pub fn effective_components(&self, rel: f64) -> usize {
        let total = self.total_weight();
        self.weights.iter().filter(|w| **w > rel * total).count()
    }
}

/// A covariance function and its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `exp(−½‖τ‖²/ℓ²)`.
    SquaredExponential { lengthscale: f64 },
    /// Matérn ν = 3/2: `a (1 + √3 r/ℓ) exp(−√3 r/ℓ)`.
    Matern32 { amplitude: f64, lengthscale: f64 },
    /// `(1 + ‖τ‖²/(2αℓ²))^−α`.
    RationalQuadratic { alpha: f64, lengthscale: f64 },
    /// `exp(−2 Σ_p sin²(π τ_p ω)/ℓ²)`.
    Periodic { frequency: f64, lengthscale: f64 },
    SpectralMixture(SmParams),
    /// `σ² (−e^{−0.01})^{|τ|} / (1 − e^{−0.02})` on integer lags in one dimension.
    Ar1 { sigma: f64 },
    Scaled { scale: f64, inner: Box<KernelSpec> },
    Sum(Vec<KernelSpec>),
}

/// How a parameter is mapped to an unconstrained optimization coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Strictly positive (or ≥ 0), optimized as a logarithm.
    Positive,
    /// Spectral-mixture frequency, unconstrained by default.
    Frequency,
}

/// A named, constrained hyperparameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: f64,
    pub kind: ParamKind,
}

impl KernelSpec {
    pub fn se(lengthscale: f64) -> Self {
        KernelSpec::SquaredExponential { lengthscale }
    }

    pub fn matern32(amplitude: f64, lengthscale: f64) -> Self {
        KernelSpec::Matern32 {
            amplitude,
            lengthscale,
        }
    }

    pub fn rq(alpha: f64, lengthscale: f64) -> Self {
        KernelSpec::RationalQuadratic { alpha, lengthscale }
    }

    pub fn periodic(frequency: f64, lengthscale: f64) -> Self {
        KernelSpec::Periodic {
            frequency,
            lengthscale,
        }
    }

    pub fn sm(params: SmParams) -> Self {
        KernelSpec::SpectralMixture(params)
    }

    pub fn ar1(sigma: f64) -> Self {
        KernelSpec::Ar1 { sigma }
    }

    pub fn scaled(scale: f64, inner: KernelSpec) -> Self {
        KernelSpec::Scaled {
            scale,
            inner: Box::new(inner),
        }
    }

    /// Short family name used in reports.
    pub fn family(&self) -> &'static str {
        match self {
            KernelSpec::SquaredExponential { .. } => "SE",
            KernelSpec::Matern32 { .. } => "MA",
            KernelSpec::RationalQuadratic { .. } => "RQ",
            KernelSpec::Periodic { .. } => "PE",
            KernelSpec::SpectralMixture(_) => "SM",
            KernelSpec::Ar1 { .. } => "AR1",
            KernelSpec::Scaled { inner, .. } => inner.family(),
            KernelSpec::Sum(_) => "SUM",
        }
    }

    /// Checks the positivity invariants of every parameter.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        }
        match self {
            KernelSpec::SquaredExponential { lengthscale } => positive("lengthscale", *lengthscale),
            KernelSpec::Matern32 {
                amplitude,
                lengthscale,
            } => {
                positive("amplitude", *amplitude)?;
                positive("lengthscale", *lengthscale)
            }
            KernelSpec::RationalQuadratic { alpha, lengthscale } => {
                positive("alpha", *alpha)?;
                positive("lengthscale", *lengthscale)
            }
            KernelSpec::Periodic {
                frequency,
                lengthscale,
            } => {
                positive("frequency", *frequency)?;
                positive("lengthscale", *lengthscale)
            }
            KernelSpec::SpectralMixture(p) => p.validate(),
            KernelSpec::Ar1 { sigma } => positive("sigma", *sigma),
            KernelSpec::Scaled { scale, inner } => {
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(Error::InvalidParameter(format!("scale must be ≥ 0, got {scale}")));
                }
                inner.validate()
            }
            KernelSpec::Sum(terms) => {
                if terms.is_empty() {
                    return Err(Error::InvalidParameter("empty kernel sum".into()));
                }
                terms.iter().try_for_each(KernelSpec::validate)
            }
        }
    }

    /// Input dimension fixed by the kernel, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            KernelSpec::SpectralMixture(p) => Some(p.dim()),
            KernelSpec::Ar1 { .. } => Some(1),
            KernelSpec::Scaled { inner, .. } => inner.fixed_dim(),
            KernelSpec::Sum(terms) => terms.iter().find_map(KernelSpec::fixed_dim),
            _ => None,
        }
    }

    fn contains_ar1(&self) -> bool {
        match self {
            KernelSpec::Ar1 { .. } => true,
            KernelSpec::Scaled { inner, .. } => inner.contains_ar1(),
            KernelSpec::Sum(terms) => terms.iter().any(KernelSpec::contains_ar1),
            _ => false,
        }
    }

    /// Rejects inputs of dimension `p` the kernel cannot evaluate.
    pub fn check_dim(&self, p: usize) -> Result<()> {
        match self {
            KernelSpec::SpectralMixture(sm) if sm.dim() != p => Err(Error::DimensionMismatch {
                expected: sm.dim(),
                found: p,
            }),
            KernelSpec::Ar1 { .. } if p != 1 => Err(Error::Unsupported(format!(
                "AR(1) kernel is defined on one-dimensional inputs only, got P = {p}"
            ))),
            KernelSpec::Scaled { inner, .. } => inner.check_dim(p),
            KernelSpec::Sum(terms) => terms.iter().try_for_each(|t| t.check_dim(p)),
            _ => Ok(()),
        }
    }

    /// Rejects a lag the kernel cannot evaluate.
    pub fn check_lag(&self, tau: &[f64]) -> Result<()> {
        self.check_dim(tau.len())?;
        if self.contains_ar1() && (tau[0] - tau[0].round()).abs() > INTEGER_LAG_TOL {
            return Err(Error::Unsupported(format!(
                "AR(1) kernel requires integer lags, got {}",
                tau[0]
            )));
        }
        Ok(())
    }

    /// Covariance at lag `tau`; the caller guarantees [`check_lag`](Self::check_lag).
    pub fn eval_lag(&self, tau: &[f64]) -> f64 {
        match self {
            KernelSpec::SquaredExponential { lengthscale } => {
                (-0.5 * norm_sq(tau) / (lengthscale * lengthscale)).exp()
            }
            KernelSpec::Matern32 {
                amplitude,
                lengthscale,
            } => {
                let u = SQRT3 * norm_sq(tau).sqrt() / lengthscale;
                amplitude * (1.0 + u) * (-u).exp()
            }
            KernelSpec::RationalQuadratic { alpha, lengthscale } => {
                let z = norm_sq(tau) / (2.0 * alpha * lengthscale * lengthscale);
                (1.0 + z).powf(-alpha)
            }
            KernelSpec::Periodic {
                frequency,
                lengthscale,
            } => {
                let s: f64 = tau.iter().map(|t| (PI * t * frequency).sin().powi(2)).sum();
                (-2.0 * s / (lengthscale * lengthscale)).exp()
            }
            KernelSpec::SpectralMixture(p) => sm_eval(p, tau),
            KernelSpec::Ar1 { sigma } => ar1_eval(*sigma, tau[0]),
            KernelSpec::Scaled { scale, inner } => scale * inner.eval_lag(tau),
            KernelSpec::Sum(terms) => terms.iter().map(|t| t.eval_lag(tau)).sum(),
        }
    }

    /// Variance `k(0)`.
    pub fn variance(&self, dim: usize) -> f64 {
        self.eval_lag(&vec![0.0; dim])
    }

    /// Hyperparameters in canonical order.
    pub fn params(&self) -> Vec<Param> {
        let mut out = Vec::new();
        self.collect_params("", &mut out);
        out
    }

    pub fn num_params(&self) -> usize {
        match self {
            KernelSpec::SquaredExponential { .. } | KernelSpec::Ar1 { .. } => 1,
            KernelSpec::Matern32 { .. }
            | KernelSpec::RationalQuadratic { .. }
            | KernelSpec::Periodic { .. } => 2,
            KernelSpec::SpectralMixture(p) => p.num_components() * (1 + 2 * p.dim()),
            KernelSpec::Scaled { inner, .. } => 1 + inner.num_params(),
            KernelSpec::Sum(terms) => terms.iter().map(KernelSpec::num_params).sum(),
        }
    }

    fn collect_params(&self, prefix: &str, out: &mut Vec<Param>) {
        let mut push = |name: String, value: f64, kind| out.push(Param { name, value, kind });
        use ParamKind::*;
        match self {
            KernelSpec::SquaredExponential { lengthscale } => {
                push(format!("{prefix}lengthscale"), *lengthscale, Positive)
            }
            KernelSpec::Matern32 {
                amplitude,
                lengthscale,
            } => {
                push(format!("{prefix}amplitude"), *amplitude, Positive);
                push(format!("{prefix}lengthscale"), *lengthscale, Positive);
            }
            KernelSpec::RationalQuadratic { alpha, lengthscale } => {
                push(format!("{prefix}alpha"), *alpha, Positive);
                push(format!("{prefix}lengthscale"), *lengthscale, Positive);
            }
            KernelSpec::Periodic {
                frequency,
                lengthscale,
            } => {
                push(format!("{prefix}frequency"), *frequency, Positive);
                push(format!("{prefix}lengthscale"), *lengthscale, Positive);
            }
            KernelSpec::SpectralMixture(p) => {
                for (q, w) in p.weights.iter().enumerate() {
                    push(format!("{prefix}weight.{q}"), *w, Positive);
                }
                for (q, row) in p.means.iter().enumerate() {
                    for (d, m) in row.iter().enumerate() {
                        push(format!("{prefix}mean.{q}.{d}"), *m, Frequency);
                    }
                }
                for (q, row) in p.variances.iter().enumerate() {
                    for (d, v) in row.iter().enumerate() {
                        push(format!("{prefix}variance.{q}.{d}"), *v, Positive);
                    }
                }
            }
            KernelSpec::Ar1 { sigma } => push(format!("{prefix}sigma"), *sigma, Positive),
            KernelSpec::Scaled { scale, inner } => {
                push(format!("{prefix}scale"), *scale, Positive);
                inner.collect_params(&format!("{prefix}inner."), out);
            }
            KernelSpec::Sum(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    t.collect_params(&format!("{prefix}{i}."), out);
                }
            }
        }
    }

    /// Same structure with parameter values replaced, in canonical order.
    pub fn with_params(&self, values: &[f64]) -> Result<KernelSpec> {
        if values.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: values.len(),
            });
        }
        let mut it = values.iter().copied();
        let spec = self.rebuild(&mut it);
        spec.validate()?;
        Ok(spec)
    }

    fn rebuild(&self, it: &mut impl Iterator<Item = f64>) -> KernelSpec {
        let mut next = || it.next().expect("parameter count checked");
        match self {
            KernelSpec::SquaredExponential { .. } => KernelSpec::SquaredExponential { lengthscale: next() },
            KernelSpec::Matern32 { .. } => KernelSpec::Matern32 {
                amplitude: next(),
                lengthscale: next(),
            },
            KernelSpec::RationalQuadratic { .. } => KernelSpec::RationalQuadratic {
                alpha: next(),
                lengthscale: next(),
            },
            KernelSpec::Periodic { .. } => KernelSpec::Periodic {
                frequency: next(),
                lengthscale: next(),
            },
            KernelSpec::SpectralMixture(p) => {
                let (q, d) = (p.num_components(), p.dim());
                let weights = (0..q).map(|_| next()).collect();
                let means = (0..q).map(|_| (0..d).map(|_| next()).collect()).collect();
                let variances = (0..q).map(|_| (0..d).map(|_| next()).collect()).collect();
                KernelSpec::SpectralMixture(SmParams {
                    weights,
                    means,
                    variances,
                })
            }
            KernelSpec::Ar1 { .. } => KernelSpec::Ar1 { sigma: next() },
            KernelSpec::Scaled { inner, .. } => {
                let scale = next();
                KernelSpec::Scaled {
                    scale,
                    inner: Box::new(inner.rebuild(it)),
                }
            }
            KernelSpec::Sum(terms) => KernelSpec::Sum(terms.iter().map(|t| t.rebuild(it)).collect()),
        }
    }

    /// Adds `weight · ∂k(τ)/∂u` into `out`, where `u` are the unconstrained
    /// coordinates (log for positive parameters, identity for frequencies).
    /// `out.len()` must equal [`num_params`](Self::num_params).
    pub fn accumulate_gradient(&self, tau: &[f64], weight: f64, out: &mut [f64]) {
        match self {
            KernelSpec::SquaredExponential { lengthscale } => {
                let r2 = norm_sq(tau) / (lengthscale * lengthscale);
                out[0] += weight * (-0.5 * r2).exp() * r2;
            }
            KernelSpec::Matern32 {
                amplitude,
                lengthscale,
            } => {
                let u = SQRT3 * norm_sq(tau).sqrt() / lengthscale;
                let e = (-u).exp();
                out[0] += weight * amplitude * (1.0 + u) * e;
                out[1] += weight * amplitude * u * u * e;
            }
            KernelSpec::RationalQuadratic { alpha, lengthscale } => {
                let r2 = norm_sq(tau) / (lengthscale * lengthscale);
                let z = r2 / (2.0 * alpha);
                let base = (1.0 + z).powf(-alpha);
                out[0] += weight * base * alpha * (z / (1.0 + z) - z.ln_1p());
                out[1] += weight * base * r2 / (1.0 + z);
            }
            KernelSpec::Periodic {
                frequency,
                lengthscale,
            } => {
                let l2 = lengthscale * lengthscale;
                let (mut s2, mut ts) = (0.0, 0.0);
                for t in tau {
                    s2 += (PI * t * frequency).sin().powi(2);
                    ts += t * (2.0 * PI * t * frequency).sin();
                }
                let k = (-2.0 * s2 / l2).exp();
                out[0] += weight * k * (-2.0 * PI * frequency / l2) * ts;
                out[1] += weight * k * 4.0 * s2 / l2;
            }
            KernelSpec::SpectralMixture(p) => sm_accumulate_gradient(p, tau, weight, out),
            KernelSpec::Ar1 { sigma } => out[0] += weight * 2.0 * ar1_eval(*sigma, tau[0]),
            KernelSpec::Scaled { scale, inner } => {
                out[0] += weight * scale * inner.eval_lag(tau);
                inner.accumulate_gradient(tau, weight * scale, &mut out[1..]);
            }
            KernelSpec::Sum(terms) => {
                let mut offset = 0;
                for t in terms {
                    let n = t.num_params();
                    t.accumulate_gradient(tau, weight, &mut out[offset..offset + n]);
                    offset += n;
                }
            }
        }
    }
}

fn norm_sq(tau: &[f64]) -> f64 {
    tau.iter().map(|t| t * t).sum()
}

fn lag(x: &[f64], x2: &[f64]) -> Result<Vec<f64>> {
    if x.len() != x2.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: x2.len(),
        });
    }
    Ok(x.iter().zip(x2).map(|(a, b)| a - b).collect())
}

fn ar1_eval(sigma: f64, tau: f64) -> f64 {
    let h = tau.abs().round();
    let rho = (-AR1_DECAY).exp();
    let sign = if (h as i64) % 2 == 0 { 1.0 } else { -1.0 };
    sigma * sigma * sign * rho.powf(h) / (1.0 - (-2.0 * AR1_DECAY).exp())
}

fn sm_eval(p: &SmParams, tau: &[f64]) -> f64 {
    if tau.len() == 1 {
        let t = tau[0];
        let t2 = TWO_PI_SQ * t * t;
        return p
            .weights
            .iter()
            .zip(&p.means)
            .zip(&p.variances)
            .map(|((w, m), v)| w * (-t2 * v[0]).exp() * (2.0 * PI * t * m[0]).cos())
            .sum();
    }
    p.weights
        .iter()
        .zip(&p.means)
        .zip(&p.variances)
        .map(|((w, m), v)| {
            w * tau
                .iter()
                .zip(m.iter().zip(v))
                .map(|(t, (mu, var))| (-TWO_PI_SQ * t * t * var).exp() * (2.0 * PI * t * mu).cos())
                .product::<f64>()
        })
        .sum()
}

fn sm_accumulate_gradient(p: &SmParams, tau: &[f64], weight: f64, out: &mut [f64]) {
    let q_count = p.num_components();
    let dim = p.dim();
    let (weights, rest) = out.split_at_mut(q_count);
    let (means, vars) = rest.split_at_mut(q_count * dim);
    if dim == 1 {
        let t = tau[0];
        let t2 = TWO_PI_SQ * t * t;
        for q in 0..q_count {
            let w = weight * p.weights[q];
            let v = p.variances[q][0];
            let env = (-t2 * v).exp();
            let (s, c) = (2.0 * PI * t * p.means[q][0]).sin_cos();
            let f = env * c;
            weights[q] += w * f;
            means[q] -= w * env * s * 2.0 * PI * t;
            vars[q] -= w * t2 * v * f;
        }
        return;
    }
    let mut factors = vec![0.0; dim];
    for q in 0..q_count {
        let w = weight * p.weights[q];
        let mut sines = vec![0.0; dim];
        for d in 0..dim {
            let t = tau[d];
            let env = (-TWO_PI_SQ * t * t * p.variances[q][d]).exp();
            let (s, c) = (2.0 * PI * t * p.means[q][d]).sin_cos();
            factors[d] = env * c;
            sines[d] = env * s;
        }
        weights[q] += w * factors.iter().product::<f64>();
        for d in 0..dim {
            let t = tau[d];
            let others: f64 = (0..dim).filter(|e| *e != d).map(|e| factors[e]).product();
            means[q * dim + d] -= w * others * sines[d] * 2.0 * PI * t;
            vars[q * dim + d] -= w * others * TWO_PI_SQ * t * t * p.variances[q][d] * factors[d];
        }
    }
}

/// `k(x, x2)` with dimension and lag checks.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    let tau = lag(x, x2)?;
    spec.check_lag(&tau)?;
    Ok(spec.eval_lag(&tau))
}

/// Spectral mixture covariance at lag `tau`.
pub fn sm_kernel(params: &SmParams, tau: &[f64]) -> Result<f64> {
    if tau.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: tau.len(),
        });
    }
    Ok(sm_eval(params, tau))
}

/// `∂k(x, x2)/∂u` over the unconstrained coordinates in canonical order.
pub fn kernel_gradient(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<Vec<f64>> {
    let tau = lag(x, x2)?;
    spec.check_lag(&tau)?;
    let mut out = vec![0.0; spec.num_params()];
    spec.accumulate_gradient(&tau, 1.0, &mut out);
    Ok(out)
}
