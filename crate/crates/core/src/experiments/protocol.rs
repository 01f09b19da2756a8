//! Experiment presets, the train/test protocol and the metrics table.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::export::{correlation_samples, spectrum_samples};
use super::generators::{generate_ar1, generate_from_kernel, generate_sinc, matern_preset, rqpe_preset, unit_grid};
use super::metrics::{compute_metrics, MetricsEntry};
use crate::data::{Dataset, Inputs};
use crate::error::{Error, Result};
use crate::gp::{GpOptions, GpPosterior, PredictiveDistribution};
use crate::io::ingest_csv;
use crate::kernel::KernelSpec;
use crate::optim::{default_nyquist, train, Baseline, OptimConfig, OptimResult, Template};
use crate::seed;

/// Weight threshold, relative to the total, for counting SM components.
pub const EFFECTIVE_WEIGHT: f64 = 1e-3;

/// Noise scale of the AR(1) series in the negative-covariance experiment.
pub const NEGCOV_SIGMA: f64 = 2.0;

/// Observation noise variance added to the recovery draws.
pub const RECOVERY_NOISE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Co2,
    MaternRecovery,
    RqpeRecovery,
    Negcov,
    Sinc,
    Airline,
    CustomCsv,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::Co2,
        ExperimentId::MaternRecovery,
        ExperimentId::RqpeRecovery,
        ExperimentId::Negcov,
        ExperimentId::Sinc,
        ExperimentId::Airline,
        ExperimentId::CustomCsv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Co2 => "co2",
            ExperimentId::MaternRecovery => "matern-recovery",
            ExperimentId::RqpeRecovery => "rqpe-recovery",
            ExperimentId::Negcov => "negcov",
            ExperimentId::Sinc => "sinc",
            ExperimentId::Airline => "airline",
            ExperimentId::CustomCsv => "custom-csv",
        }
    }

    pub fn default_components(self) -> usize {
        match self {
            ExperimentId::RqpeRecovery | ExperimentId::Negcov => 4,
            _ => 10,
        }
    }

    /// Default CSV location for the experiments backed by real data.
    pub fn default_data_file(self) -> Option<&'static str> {
        match self {
            ExperimentId::Co2 => Some("data/co2.csv"),
            ExperimentId::Airline => Some("data/airline.csv"),
            _ => None,
        }
    }

    /// `(train, test)` sizes of the fixed protocols.
    pub fn split(self) -> Option<(usize, usize)> {
        match self {
            ExperimentId::Co2 => Some((200, 301)),
            ExperimentId::Airline => Some((96, 48)),
            ExperimentId::Negcov => Some((400, 20)),
            ExperimentId::Sinc => Some((700, 300)),
            ExperimentId::MaternRecovery | ExperimentId::RqpeRecovery => Some((100, 0)),
            ExperimentId::CustomCsv => None,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ExperimentId::ALL.iter().map(|i| i.name()).collect();
                Error::InvalidParameter(format!("unknown experiment {s:?} (expected one of {})", names.join(", ")))
            })
    }
}

/// Kernel families compared in the experiments, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelFamily {
    Sm,
    Se,
    Ma,
    Rq,
    Pe,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 5] = [
        KernelFamily::Sm,
        KernelFamily::Se,
        KernelFamily::Ma,
        KernelFamily::Rq,
        KernelFamily::Pe,
    ];

    pub fn label(self) -> &'static str {
        match self {
            KernelFamily::Sm => "SM",
            KernelFamily::Se => "SE",
            KernelFamily::Ma => "MA",
            KernelFamily::Rq => "RQ",
            KernelFamily::Pe => "PE",
        }
    }

    pub fn template(self, components: usize) -> Template {
        match self {
            KernelFamily::Sm => Template::SpectralMixture { components },
            KernelFamily::Se => Template::Baseline(Baseline::SquaredExponential),
            KernelFamily::Ma => Template::Baseline(Baseline::Matern),
            KernelFamily::Rq => Template::Baseline(Baseline::RationalQuadratic),
            KernelFamily::Pe => Template::Baseline(Baseline::Periodic),
        }
    }

    /// Parses a comma-separated roster such as `SM,SE`; the result is in
    /// table order without repeats.
    pub fn parse_roster(s: &str) -> Result<Vec<KernelFamily>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let fam: KernelFamily = part.parse()?;
            if !out.contains(&fam) {
                out.push(fam);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("kernel roster is empty".into()));
        }
        out.sort();
        Ok(out)
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        KernelFamily::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown kernel {s:?} (expected SM, SE, MA, RQ or PE)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub roster: Vec<KernelFamily>,
    /// SM component count.
    pub components: usize,
    /// Shared optimizer settings; the seed is replaced per kernel.
    pub optim: OptimConfig,
    pub seed: u64,
    pub data_path: Option<PathBuf>,
    pub gp: GpOptions,
    /// Confine SM frequencies to the Nyquist band of the training inputs.
    pub nyquist_cap: bool,
    /// Leading rows used for training in `custom-csv`; defaults to 80%.
    pub train_count: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentConfig {
            id,
            roster: KernelFamily::ALL.to_vec(),
            components: id.default_components(),
            optim: OptimConfig::default(),
            seed: 0,
            data_path: None,
            gp: GpOptions::default(),
            nyquist_cap: false,
            train_count: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.roster.is_empty() {
            return Err(Error::InvalidParameter("kernel roster is empty".into()));
        }
        if self.components == 0 {
            return Err(Error::InvalidParameter("Q must be ≥ 1".into()));
        }
        if self.id == ExperimentId::CustomCsv && self.data_path.is_none() {
            return Err(Error::InvalidParameter("custom-csv needs a data file".into()));
        }
        self.optim.validate()
    }

    /// Seed for one roster entry, independent of the rest of the roster.
    pub fn kernel_seed(&self, family: KernelFamily) -> u64 {
        seed::derive(self.seed, family.label())
    }

    pub fn data_seed(&self) -> u64 {
        seed::derive(self.seed, "data")
    }
}

fn load_real(path: &Path, id: ExperimentId) -> Result<(Inputs, Vec<f64>)> {
    if !path.exists() {
        return Err(Error::Data(format!(
            "{id} data file {} not found (expected a CSV with two columns x,y, header optional, one row per month)",
            path.display()
        )));
    }
    let d = ingest_csv(path)?;
    // Shift time so the first month is 1; gaps keep their width.
    let xs = d.x.column(0);
    let first = xs[0];
    Ok((Inputs::from_1d(&xs.iter().map(|x| x - first + 1.0).collect::<Vec<_>>()), d.y))
}

/// Training and test data of an experiment.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let ds = config.data_seed();
    match config.id {
        ExperimentId::Sinc => generate_sinc(700, 300, ds),
        ExperimentId::Negcov => {
            let d = generate_ar1(420, NEGCOV_SIGMA, ds)?;
            Dataset::split_head(&d.x, &d.y, 400, 20)
        }
        ExperimentId::MaternRecovery => generate_from_kernel(&matern_preset(), &unit_grid(100), RECOVERY_NOISE, ds),
        ExperimentId::RqpeRecovery => generate_from_kernel(&rqpe_preset(), &unit_grid(100), RECOVERY_NOISE, ds),
        ExperimentId::Co2 | ExperimentId::Airline => {
            let default = PathBuf::from(config.id.default_data_file().unwrap_or_default());
            let path = config.data_path.clone().unwrap_or(default);
            let (x, y) = load_real(&path, config.id)?;
            let (n_train, n_test) = config.id.split().unwrap_or_default();
            if y.len() < n_train + n_test {
                return Err(Error::Data(format!(
                    "{}: {} rows, the {} protocol needs {}",
                    path.display(),
                    y.len(),
                    config.id,
                    n_train + n_test
                )));
            }
            Dataset::split_head(&x, &y, n_train, n_test)
        }
        ExperimentId::CustomCsv => {
            let path = config
                .data_path
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("custom-csv needs a data file".into()))?;
            let d = ingest_csv(path)?;
            let n = d.len();
            let n_train = config.train_count.unwrap_or((n * 4).div_ceil(5));
            if n_train == 0 || n_train > n {
                return Err(Error::InvalidParameter(format!("training count {n_train} outside 1..={n}")));
            }
            Dataset::split_head(&d.x, &d.y, n_train, n - n_train)
        }
    }
}

/// Predictive curve over all inputs of the experiment, noise included.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionCurve {
    pub x: Vec<f64>,
    pub predictive: PredictiveDistribution,
}

#[derive(Debug, Clone)]
pub struct KernelResult {
    pub posterior: GpPosterior,
    pub optim: OptimResult,
    /// `None` when the experiment has no test set.
    pub metrics: Option<MetricsEntry>,
    pub curve: PredictionCurve,
    pub spectrum: Vec<(f64, f64)>,
    pub correlation: Vec<(f64, f64)>,
    /// SM components with weight above `EFFECTIVE_WEIGHT` of the total.
    pub effective_components: Option<usize>,
}

impl KernelResult {
    pub fn train_log_marginal_likelihood(&self) -> f64 {
        self.optim.best_log_marginal_likelihood
    }
}

#[derive(Debug, Clone)]
pub struct KernelReport {
    pub family: KernelFamily,
    pub seed: u64,
    pub outcome: std::result::Result<KernelResult, String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: Dataset,
    pub nyquist: f64,
    pub kernels: Vec<KernelReport>,
}

impl ExperimentReport {
    pub fn kernel(&self, family: KernelFamily) -> Option<&KernelResult> {
        self.kernels
            .iter()
            .find(|k| k.family == family)
            .and_then(|k| k.outcome.as_ref().ok())
    }

    /// Plain-text table, one column per roster kernel in SM/SE/MA/RQ/PE order.
    pub fn metrics_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {}", self.config.id);
        let _ = writeln!(s, "seed {}", self.config.seed);
        let _ = writeln!(
            s,
            "train {} test {}",
            self.dataset.len(),
            self.dataset.test.as_ref().map_or(0, |t| t.1.len())
        );
        let _ = write!(s, "{:<12}", "metric");
        for k in &self.kernels {
            let _ = write!(s, " {:>15}", k.family.label());
        }
        s.push('\n');
        type Cell = fn(&KernelResult) -> Option<f64>;
        let rows: [(&str, Cell); 6] = [
            ("MSE", |r| r.metrics.as_ref().map(|m| m.mse)),
            ("L", |r| r.metrics.as_ref().map(|m| m.log_likelihood)),
            ("L_pointwise", |r| r.metrics.as_ref().map(|m| m.log_likelihood_pointwise)),
            ("coverage", |r| r.metrics.as_ref().map(|m| m.coverage)),
            ("train_lml", |r| Some(r.train_log_marginal_likelihood())),
            ("components", |r| r.effective_components.map(|c| c as f64)),
        ];
        for (name, cell) in rows {
            let _ = write!(s, "{name:<12}");
            for k in &self.kernels {
                let text = match &k.outcome {
                    Err(_) => "failed".to_string(),
                    Ok(r) => match cell(r) {
                        None => "-".to_string(),
                        Some(v) if name == "components" => format!("{v}"),
                        Some(v) => format!("{v:.6e}"),
                    },
                };
                let _ = write!(s, " {text:>15}");
            }
            s.push('\n');
        }
        for k in &self.kernels {
            if let Err(e) = &k.outcome {
                let _ = writeln!(s, "# {} failed: {e}", k.family);
            }
        }
        s
    }
}

fn all_inputs(data: &Dataset) -> Vec<f64> {
    let mut x = data.x.column(0);
    if let Some((tx, _)) = &data.test {
        x.extend(tx.column(0));
    }
    x.sort_by(f64::total_cmp);
    x
}

fn effective_components(spec: &KernelSpec) -> Option<usize> {
    match spec {
        KernelSpec::SpectralMixture(p) => Some(p.effective_components(EFFECTIVE_WEIGHT)),
        _ => None,
    }
}

fn run_kernel(config: &ExperimentConfig, family: KernelFamily, data: &Dataset, nyquist: f64) -> Result<KernelResult> {
    let optim = OptimConfig {
        seed: config.kernel_seed(family),
        nyquist: if config.nyquist_cap && family == KernelFamily::Sm {
            Some(nyquist)
        } else {
            config.optim.nyquist
        },
        ..config.optim.clone()
    };
    let template = family.template(config.components);
    let (posterior, result) = train(&template, data, &optim, &config.gp)?;
    let metrics = match &data.test {
        Some((tx, ty)) if !ty.is_empty() => Some(compute_metrics(&posterior, tx, ty)?),
        _ => None,
    };
    let x = all_inputs(data);
    let predictive = posterior.predict(&Inputs::from_1d(&x), true)?;
    let spec = posterior.spec();
    let range = data.x.range(0);
    Ok(KernelResult {
        metrics,
        curve: PredictionCurve { x, predictive },
        spectrum: spectrum_samples(spec, nyquist, range)?,
        correlation: correlation_samples(spec, 0.5 * range)?,
        effective_components: effective_components(spec),
        posterior,
        optim: result,
    })
}

/// Trains every roster kernel on the experiment's data and scores it on the
/// test set. A kernel that fails is recorded and the others proceed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut roster = config.roster.clone();
    roster.sort();
    roster.dedup();
    let dataset = load_dataset(config)?;
    if dataset.dim() != 1 {
        return Err(Error::Unsupported("experiments take one-dimensional inputs".into()));
    }
    let nyquist = default_nyquist(&dataset, 0)?;
    let mut kernels = Vec::with_capacity(roster.len());
    for family in roster {
        log::info!("{}: training {family}", config.id);
        let outcome = run_kernel(config, family, &dataset, nyquist).map_err(|e| {
            log::warn!("{}: {family} failed: {e}", config.id);
            e.to_string()
        });
        kernels.push(KernelReport {
            family,
            seed: config.kernel_seed(family),
            outcome,
        });
    }
    Ok(ExperimentReport {
        config: config.clone(),
        dataset,
        nyquist,
        kernels,
    })
}
