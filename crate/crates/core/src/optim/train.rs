use std::fmt::Write as _;

use rand_distr::{Distribution, Normal};

use super::cg::{minimize_cg, CgConfig, Termination};
use super::init::{init_baseline, init_sm_random, Baseline};
use crate::data::{variance, Dataset};
use crate::error::{Error, Result};
use crate::gp::{lml_and_gradient, GpOptions, GpPosterior};
use crate::kernel::{FrequencyTransform, HyperVector, KernelSpec};
use crate::seed;

/// Standard deviation of the perturbation applied to baseline restarts,
/// on the unconstrained (log) scale.
const RESTART_JITTER: f64 = 0.5;

/// Default noise-variance floor relative to the target variance.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-6;

/// Initial noise variance relative to the target variance.
const INITIAL_NOISE: f64 = 0.1;

/// What to train.
#[derive(Debug, Clone, PartialEq)]
pub enum Template {
    /// Spectral mixture with `components` terms, randomly initialized per restart.
    SpectralMixture { components: usize },
    Baseline(Baseline),
    /// A caller-supplied starting kernel.
    Fixed(KernelSpec),
}

impl Template {
    pub fn label(&self) -> String {
        match self {
            Template::SpectralMixture { .. } => "SM".into(),
            Template::Baseline(b) => b.label().into(),
            Template::Fixed(spec) => spec.family().into(),
        }
    }

    pub fn default_restarts(&self) -> usize {
        match self {
            Template::SpectralMixture { .. } => 10,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Relative objective-change tolerance.
    pub objective_tolerance: f64,
    pub sufficient_decrease: f64,
    pub curvature: f64,
    /// Restart count; `None` uses the template default (10 for SM, 3 otherwise).
    pub restarts: Option<usize>,
    pub seed: u64,
    /// When set, SM frequencies are confined to `(0, nyquist)` during
    /// optimization and random initialization draws from `[0, nyquist]`.
    pub nyquist: Option<f64>,
    /// Objective evaluations allowed per restart.
    pub max_evaluations: usize,
    /// Lower bound on the noise variance, relative to the target variance.
    pub noise_floor: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            max_iterations: 1000,
            gradient_tolerance: 1e-6,
            objective_tolerance: 1e-9,
            sufficient_decrease: 1e-4,
            curvature: 0.1,
            restarts: None,
            seed: 0,
            nyquist: None,
            max_evaluations: usize::MAX,
            noise_floor: DEFAULT_NOISE_FLOOR,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0 && self.objective_tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be > 0".into()));
        }
        if !(0.0 < self.sufficient_decrease && self.sufficient_decrease < self.curvature && self.curvature < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "line search needs 0 < c1 < c2 < 1, got c1 = {}, c2 = {}",
                self.sufficient_decrease, self.curvature
            )));
        }
        if !(self.noise_floor >= 0.0 && self.noise_floor < INITIAL_NOISE) {
            return Err(Error::InvalidParameter(format!(
                "noise floor must lie in [0, {INITIAL_NOISE}), got {}",
                self.noise_floor
            )));
        }
        if self.restarts == Some(0) {
            return Err(Error::InvalidParameter("restart count must be ≥ 1".into()));
        }
        if let Some(n) = self.nyquist {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidParameter(format!("nyquist must be > 0, got {n}")));
            }
        }
        Ok(())
    }

    fn cg(&self) -> CgConfig {
        CgConfig {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            objective_tolerance: self.objective_tolerance,
            c1: self.sufficient_decrease,
            c2: self.curvature,
            max_evaluations: self.max_evaluations,
            ..CgConfig::default()
        }
    }
}

/// Provenance of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub index: usize,
    pub seed: u64,
    /// Unconstrained starting coordinates.
    pub initial: Vec<f64>,
    pub initial_log_marginal_likelihood: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub final_log_marginal_likelihood: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best: HyperVector,
    pub best_log_marginal_likelihood: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartTrace>,
}

impl OptimResult {
    /// Plain-text per-restart log.
    pub fn trace_log(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# restart seed initial_lml final_lml iterations evaluations termination");
        for r in &self.restarts {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                r.index,
                r.seed,
                r.initial_log_marginal_likelihood,
                r.final_log_marginal_likelihood,
                r.iterations,
                r.evaluations,
                r.termination
            );
        }
        let _ = writeln!(out, "# best restart {} lml {}", self.best_restart, self.best_log_marginal_likelihood);
        for (slot, v) in self.best.slots().iter().zip(&self.best.values) {
            let _ = writeln!(out, "# u.{} = {}", slot.name(), v);
        }
        out
    }
}

fn initial_point(template: &Template, data: &Dataset, config: &OptimConfig, index: usize, restart_seed: u64) -> Result<HyperVector> {
    let scale = {
        let v = variance(&data.y);
        if v > 0.0 && v.is_finite() {
            v
        } else {
            1.0
        }
    };
    let noise = INITIAL_NOISE * scale;
    let floor = config.noise_floor * scale;
    let transform = match config.nyquist {
        Some(upper) => FrequencyTransform::Logistic { upper },
        None => FrequencyTransform::Unconstrained,
    };
    match template {
        Template::SpectralMixture { components } => {
            let params = init_sm_random(*components, data, restart_seed, config.nyquist)?;
            HyperVector::flatten_with_noise_floor(&KernelSpec::sm(params), noise, transform, floor)
        }
        Template::Baseline(_) | Template::Fixed(_) => {
            let spec = match template {
                Template::Baseline(kind) => init_baseline(*kind, data)?,
                Template::Fixed(spec) => spec.clone(),
                Template::SpectralMixture { .. } => unreachable!(),
            };
            let mut hyper = HyperVector::flatten_with_noise_floor(&spec, noise, transform, floor)?;
            if index > 0 {
                let mut rng = seed::rng(restart_seed);
                let normal = Normal::new(0.0, RESTART_JITTER).expect("valid normal");
                for v in hyper.values.iter_mut() {
                    *v += normal.sample(&mut rng);
                }
            }
            Ok(hyper)
        }
    }
}

/// Maximizes the log marginal likelihood over `config`'s restarts and
/// returns the posterior of the best one.
pub fn train(template: &Template, data: &Dataset, config: &OptimConfig, gp: &GpOptions) -> Result<(GpPosterior, OptimResult)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::DegenerateInput("cannot train on an empty dataset".into()));
    }
    let restarts = config.restarts.unwrap_or_else(|| template.default_restarts());
    let cg = config.cg();
    let mut traces = Vec::with_capacity(restarts);
    let mut best: Option<(usize, HyperVector, f64)> = None;
    let mut diagnostics = Vec::new();

    for index in 0..restarts {
        let restart_seed = seed::derive_indexed(config.seed, index);
        let start = match initial_point(template, data, config, index, restart_seed) {
            Ok(h) => h,
            Err(e) => {
                diagnostics.push(format!("restart {index}: initialization failed: {e}"));
                continue;
            }
        };
        let layout = start.clone();
        let objective = |u: &[f64]| -> std::result::Result<(f64, Vec<f64>), String> {
            let h = layout.with_values(u.to_vec()).map_err(|e| e.to_string())?;
            let (lml, grad) = lml_and_gradient(&h, data, gp).map_err(|e| e.to_string())?;
            Ok((-lml, grad.into_iter().map(|g| -g).collect()))
        };
        let outcome = minimize_cg(objective, &start.values, &cg);
        let trace = RestartTrace {
            index,
            seed: restart_seed,
            initial: start.values.clone(),
            initial_log_marginal_likelihood: -outcome.initial_value,
            iterations: outcome.iterations,
            evaluations: outcome.evaluations,
            final_log_marginal_likelihood: -outcome.value,
            termination: outcome.termination.clone(),
        };
        log::debug!(
            "{} restart {index}: lml {} -> {} ({} iterations, {})",
            template.label(),
            trace.initial_log_marginal_likelihood,
            trace.final_log_marginal_likelihood,
            trace.iterations,
            trace.termination
        );
        if let Termination::Aborted(why) = &outcome.termination {
            diagnostics.push(format!("restart {index}: {why}"));
        } else {
            let lml = -outcome.value;
            if best.as_ref().is_none_or(|(_, _, b)| lml > *b) {
                best = Some((index, start.with_values(outcome.x.clone())?, lml));
            }
        }
        traces.push(trace);
    }

    let Some((best_restart, hyper, lml)) = best else {
        return Err(Error::TrainingFailed { diagnostics });
    };
    let (spec, noise) = hyper.unflatten()?;
    let posterior = GpPosterior::fit(spec, noise, data, *gp)?;
    Ok((
        posterior,
        OptimResult {
            best: hyper,
            best_log_marginal_likelihood: lml,
            best_restart,
            restarts: traces,
        },
    ))
}
