//! Command-line and config-file settings.
//!
//! A config file holds flat `key = value` lines. Flags given on the command
//! line take precedence over the file, which takes precedence over defaults.
//!
//! | key                   | value                                 |
//! |-----------------------|---------------------------------------|
//! | `experiment`          | experiment id                         |
//! | `data`                | CSV path                              |
//! | `kernels`             | roster, e.g. `SM,SE`                  |
//! | `Q`                   | SM component count                    |
//! | `restarts`            | restarts per kernel                   |
//! | `seed`                | root seed                             |
//! | `out`                 | output directory                      |
//! | `center`              | `true` / `false`                      |
//! | `nyquist_cap`         | `true` / `false`                      |
//! | `include_noise`       | `true` / `false`                      |
//! | `max_iterations`      | CG iteration cap per restart          |
//! | `max_evaluations`     | objective evaluations per restart     |
//! | `gradient_tolerance`  | CG gradient-norm tolerance            |
//! | `objective_tolerance` | CG relative objective-change tolerance|
//! | `train_count`         | training rows for `custom-csv`        |

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::experiments::{ExperimentId, KernelFamily};
use crate::kernel::format::KeyValues;
use crate::optim::OptimConfig;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SMGP_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "smgp", version, about = "Gaussian processes with spectral mixture kernels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run an experiment and write the metrics table and plot data.
    Run(Common),
    /// Train one kernel on a CSV and save the model.
    Train(Common),
    /// Predict with a saved model.
    Predict(Common),
    /// Draw prior samples from a kernel file or a saved model.
    Sample(Common),
    /// Write the spectral density of a saved model.
    Spectrum(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment id (co2, matern-recovery, rqpe-recovery, negcov, sinc, airline, custom-csv).
    #[arg(long)]
    experiment: Option<String>,
    /// Input CSV with columns x,y.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated kernel roster (SM, SE, MA, RQ, PE).
    #[arg(long)]
    kernels: Option<String>,
    /// Number of SM components.
    #[arg(long = "Q")]
    q: Option<String>,
    /// Restarts per kernel (default: 10 for SM, 3 for baselines).
    #[arg(long)]
    restarts: Option<String>,
    /// Root seed; per-kernel and data seeds derive from it.
    #[arg(long)]
    seed: Option<String>,
    /// Output directory (default: $SMGP_OUT_DIR or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Saved model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Kernel file (kernel format) for `sample`.
    #[arg(long)]
    kernel_file: Option<PathBuf>,
    /// Prediction or sampling inputs: a CSV whose first column is x.
    #[arg(long)]
    inputs: Option<PathBuf>,
    /// Number of inputs 1..=n for `sample` without --inputs.
    #[arg(long)]
    n: Option<usize>,
    /// Number of prior draws for `sample`.
    #[arg(long, default_value_t = 1)]
    draws: usize,
    /// Observation noise variance for `sample`.
    #[arg(long)]
    noise: Option<f64>,
    /// Frequency range reference for `spectrum` (default: the model's training Nyquist).
    #[arg(long)]
    nyquist: Option<f64>,
    /// Confine SM frequencies below the Nyquist frequency.
    #[arg(long, conflicts_with = "no_nyquist_cap")]
    nyquist_cap: bool,
    /// Leave SM frequencies unconstrained (default).
    #[arg(long)]
    no_nyquist_cap: bool,
    /// Subtract the training mean from targets (default).
    #[arg(long, conflicts_with = "no_center")]
    center: bool,
    /// Model targets without centering.
    #[arg(long)]
    no_center: bool,
    /// Add observation noise to predictive variances.
    #[arg(long)]
    include_noise: bool,
    /// CG iteration cap per restart.
    #[arg(long)]
    max_iterations: Option<String>,
    /// Objective evaluation cap per restart.
    #[arg(long)]
    max_evaluations: Option<String>,
    /// Training rows for custom-csv (default: first 80%).
    #[arg(long)]
    train_count: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Train,
    Predict,
    Sample,
    Spectrum,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Train => "train",
            Command::Predict => "predict",
            Command::Sample => "sample",
            Command::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    pub experiment: Option<ExperimentId>,
    pub data: Option<PathBuf>,
    pub kernels: Vec<KernelFamily>,
    pub components: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
    pub center: bool,
    pub nyquist_cap: bool,
    pub include_noise: bool,
    pub optim: OptimConfig,
    pub train_count: Option<usize>,
    pub model: Option<PathBuf>,
    pub kernel_file: Option<PathBuf>,
    pub inputs: Option<PathBuf>,
    pub n: Option<usize>,
    pub draws: usize,
    pub noise: Option<f64>,
    pub nyquist: Option<f64>,
}

impl CliConfig {
    /// `key = value` snapshot of the effective settings, in a fixed order.
    pub fn snapshot(&self) -> String {
        let opt = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        let roster: Vec<_> = self.kernels.iter().map(|k| k.label()).collect();
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("command", self.command.name().into());
        kv("experiment", self.experiment.map_or("-".into(), |e| e.name().into()));
        kv("data", opt(&self.data));
        kv("kernels", roster.join(","));
        kv("Q", self.components.map_or("default".into(), |q| q.to_string()));
        kv(
            "restarts",
            self.optim.restarts.map_or("default".into(), |r| r.to_string()),
        );
        kv("seed", self.seed.to_string());
        kv("center", self.center.to_string());
        kv("nyquist_cap", self.nyquist_cap.to_string());
        kv("include_noise", self.include_noise.to_string());
        kv("max_iterations", self.optim.max_iterations.to_string());
        kv("max_evaluations", self.optim.max_evaluations.to_string());
        kv("gradient_tolerance", self.optim.gradient_tolerance.to_string());
        kv("objective_tolerance", self.optim.objective_tolerance.to_string());
        kv("model", opt(&self.model));
        s
    }
}

/// Parsing failure; always a usage error.
#[derive(Debug)]
pub enum ParseOutcome {
    /// Help or version text requested; print and exit 0.
    Info(String),
    Usage(String),
}

fn usage(msg: impl Into<String>) -> ParseOutcome {
    ParseOutcome::Usage(msg.into())
}

fn value<T: std::str::FromStr>(flag: &Option<String>, file: &KeyValues, key: &str) -> Result<Option<T>, ParseOutcome> {
    let from_file = file.get(key).map_err(|e| usage(e.to_string()))?;
    if let Some(v) = flag {
        return v
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("invalid value `{v}` for --{key}")));
    }
    Ok(from_file)
}

fn switch(on: bool, off: bool, file: &KeyValues, key: &str, default: bool) -> Result<bool, ParseOutcome> {
    let from_file = file.get::<bool>(key).map_err(|e| usage(e.to_string()))?;
    if on {
        return Ok(true);
    }
    if off {
        return Ok(false);
    }
    Ok(from_file.unwrap_or(default))
}

fn read_config_file(path: &Path) -> Result<KeyValues, ParseOutcome> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    KeyValues::parse(&text, &path.display().to_string()).map_err(|e| usage(e.to_string()))
}

/// Parses `argv` (including the program name) and merges the optional config file.
pub fn parse_config<I, T>(argv: I) -> Result<CliConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return Err(match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ParseOutcome::Info(text),
                _ => ParseOutcome::Usage(text.trim_end().to_string()),
            });
        }
    };
    let (command, a) = match cli.command {
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Train(a) => (Command::Train, a),
        Cmd::Predict(a) => (Command::Predict, a),
        Cmd::Sample(a) => (Command::Sample, a),
        Cmd::Spectrum(a) => (Command::Spectrum, a),
    };
    let file = match &a.config {
        Some(p) => read_config_file(p)?,
        None => KeyValues::default(),
    };

    let experiment = match value::<String>(&a.experiment, &file, "experiment")? {
        Some(s) => Some(s.parse::<ExperimentId>().map_err(|e| usage(e.to_string()))?),
        None => None,
    };
    let kernels = match value::<String>(&a.kernels, &file, "kernels")? {
        Some(s) => KernelFamily::parse_roster(&s).map_err(|e| usage(e.to_string()))?,
        None if command == Command::Train => vec![KernelFamily::Sm],
        None => KernelFamily::ALL.to_vec(),
    };
    let data_file = file.get::<String>("data").map_err(|e| usage(e.to_string()))?;
    let data = a.data.clone().or(data_file.map(PathBuf::from));
    let out_file = file.get::<String>("out").map_err(|e| usage(e.to_string()))?;
    let out = match a.out.clone().or(out_file.map(PathBuf::from)) {
        Some(p) => p,
        None => std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), PathBuf::from),
    };
    let components: Option<usize> = value(&a.q, &file, "Q")?;
    if components == Some(0) {
        return Err(usage("--Q must be ≥ 1"));
    }
    let defaults = OptimConfig::default();
    let optim = OptimConfig {
        restarts: value(&a.restarts, &file, "restarts")?,
        max_iterations: value(&a.max_iterations, &file, "max_iterations")?.unwrap_or(defaults.max_iterations),
        max_evaluations: value(&a.max_evaluations, &file, "max_evaluations")?.unwrap_or(defaults.max_evaluations),
        gradient_tolerance: file
            .get("gradient_tolerance")
            .map_err(|e| usage(e.to_string()))?
            .unwrap_or(defaults.gradient_tolerance),
        objective_tolerance: file
            .get("objective_tolerance")
            .map_err(|e| usage(e.to_string()))?
            .unwrap_or(defaults.objective_tolerance),
        ..defaults
    };
    optim.validate().map_err(|e| usage(e.to_string()))?;
    let config = CliConfig {
        command,
        experiment,
        data,
        kernels,
        components,
        seed: value(&a.seed, &file, "seed")?.unwrap_or(0),
        out,
        center: switch(a.center, a.no_center, &file, "center", true)?,
        nyquist_cap: switch(a.nyquist_cap, a.no_nyquist_cap, &file, "nyquist_cap", false)?,
        include_noise: switch(a.include_noise, false, &file, "include_noise", false)?,
        optim,
        train_count: value(&a.train_count, &file, "train_count")?,
        model: a.model,
        kernel_file: a.kernel_file,
        inputs: a.inputs,
        n: a.n,
        draws: a.draws,
        noise: a.noise,
        nyquist: a.nyquist,
    };
    file.reject_unused().map_err(|e| usage(e.to_string()))?;
    validate(&config)?;
    Ok(config)
}

fn validate(c: &CliConfig) -> Result<(), ParseOutcome> {
    let need = |cond: bool, msg: &str| if cond { Ok(()) } else { Err(usage(msg)) };
    match c.command {
        Command::Run => need(c.experiment.is_some(), "run needs --experiment")?,
        Command::Train => {
            need(c.data.is_some(), "train needs --data")?;
            need(c.kernels.len() == 1, "train takes exactly one kernel in --kernels")?;
        }
        Command::Predict => {
            need(c.model.is_some(), "predict needs --model")?;
            need(c.inputs.is_some(), "predict needs --inputs")?;
        }
        Command::Sample => {
            need(
                c.model.is_some() ^ c.kernel_file.is_some(),
                "sample needs exactly one of --model and --kernel-file",
            )?;
            need(c.inputs.is_some() || c.n.is_some(), "sample needs --inputs or --n")?;
            need(c.draws >= 1, "--draws must be ≥ 1")?;
        }
        Command::Spectrum => need(c.model.is_some(), "spectrum needs --model")?,
    }
    if let Some(n) = c.noise {
        need(n.is_finite() && n >= 0.0, "--noise must be ≥ 0")?;
    }
    if let Some(n) = c.nyquist {
        need(n.is_finite() && n > 0.0, "--nyquist must be > 0")?;
    }
    Ok(())
}
