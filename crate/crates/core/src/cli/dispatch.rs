//! Subcommand execution and artifact output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{CliConfig, Command};
use crate::error::{Error, Result};
use crate::experiments::{
    run_experiment, spectrum_samples, unit_grid, ExperimentConfig, ExperimentReport, KernelResult,
};
use crate::gp::{sample_prior_many, GpOptions, GpPosterior};
use crate::io::{csv_text, ingest_csv, ingest_inputs, load_model, model_to_text, write_atomic};
use crate::kernel::format::from_text;
use crate::optim::{default_nyquist, train};
use crate::seed;

/// One written file and the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub seed: Option<u64>,
}

struct Output {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Output {
    fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let probe = dir.join(".smgp-write-check");
        fs::write(&probe, b"").map_err(|e| Error::io(dir, e))?;
        fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: &str, seed: Option<u64>) -> Result<()> {
        write_atomic(&self.dir.join(name), text.as_bytes())?;
        self.artifacts.push(Artifact {
            name: name.to_string(),
            seed,
        });
        Ok(())
    }

    fn finish(mut self, config: &CliConfig) -> Result<Vec<Artifact>> {
        let mut s = String::from("# smgp manifest\n");
        s.push_str(&config.snapshot());
        s.push_str("# artifacts: name seed\n");
        for a in &self.artifacts {
            let seed = a.seed.map_or("-".to_string(), |v| v.to_string());
            let _ = writeln!(s, "artifact = {} {seed}", a.name);
        }
        write_atomic(&self.dir.join("manifest.txt"), s.as_bytes())?;
        self.artifacts.push(Artifact {
            name: "manifest.txt".into(),
            seed: None,
        });
        Ok(self.artifacts)
    }
}

fn gp_options(config: &CliConfig) -> GpOptions {
    GpOptions {
        center_targets: config.center,
        ..GpOptions::default()
    }
}

fn prediction_csv(result: &KernelResult) -> String {
    let p = &result.curve.predictive;
    csv_text(
        &["x", "mean", "lower", "upper"],
        &[&result.curve.x, &p.mean, &p.lower(), &p.upper()],
    )
}

fn pairs_csv(header: [&str; 2], samples: &[(f64, f64)]) -> String {
    let a: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let b: Vec<f64> = samples.iter().map(|s| s.1).collect();
    csv_text(&header, &[&a, &b])
}

/// Writes every artifact of an experiment run into `out`.
fn write_report(report: &ExperimentReport, out: &mut Output) -> Result<()> {
    out.write("metrics.txt", &report.metrics_table(), Some(report.config.seed))?;
    for k in &report.kernels {
        let Ok(r) = &k.outcome else { continue };
        let label = k.family.label();
        let seed = Some(k.seed);
        out.write(&format!("{label}_prediction.csv"), &prediction_csv(r), seed)?;
        out.write(&format!("{label}_spectrum.csv"), &pairs_csv(["freq", "log_density"], &r.spectrum), seed)?;
        out.write(
            &format!("{label}_correlation.csv"),
            &pairs_csv(["tau", "correlation"], &r.correlation),
            seed,
        )?;
        out.write(&format!("{label}.model"), &model_to_text(&r.posterior, &report.dataset)?, seed)?;
        out.write(&format!("{label}_trace.log"), &r.optim.trace_log(), seed)?;
    }
    Ok(())
}

fn run(config: &CliConfig, out: &mut Output) -> Result<()> {
    let id = config
        .experiment
        .ok_or_else(|| Error::InvalidParameter("run needs an experiment".into()))?;
    let mut exp = ExperimentConfig::new(id);
    exp.roster = config.kernels.clone();
    if let Some(q) = config.components {
        exp.components = q;
    }
    exp.optim = config.optim.clone();
    exp.seed = config.seed;
    exp.data_path = config.data.clone();
    exp.gp = gp_options(config);
    exp.nyquist_cap = config.nyquist_cap;
    exp.train_count = config.train_count;
    let report = run_experiment(&exp)?;
    write_report(&report, out)?;
    print!("{}", report.metrics_table());
    Ok(())
}

fn train_one(config: &CliConfig, out: &mut Output) -> Result<()> {
    let path = config.data.as_ref().ok_or_else(|| Error::InvalidParameter("train needs --data".into()))?;
    let data = ingest_csv(path)?;
    let family = config.kernels[0];
    let template = family.template(config.components.unwrap_or(10));
    let kernel_seed = seed::derive(config.seed, family.label());
    let mut optim = config.optim.clone();
    optim.seed = kernel_seed;
    if config.nyquist_cap {
        optim.nyquist = Some(default_nyquist(&data, 0)?);
    }
    let (posterior, result) = train(&template, &data, &optim, &gp_options(config))?;
    let label = family.label();
    out.write(&format!("{label}.model"), &model_to_text(&posterior, &data)?, Some(kernel_seed))?;
    out.write(&format!("{label}_trace.log"), &result.trace_log(), Some(kernel_seed))?;
    println!("{label} log marginal likelihood {}", result.best_log_marginal_likelihood);
    Ok(())
}

fn model(config: &CliConfig) -> Result<(GpPosterior, crate::data::Dataset)> {
    let path = config.model.as_ref().ok_or_else(|| Error::InvalidParameter("missing --model".into()))?;
    load_model(path)
}

fn predict(config: &CliConfig, out: &mut Output) -> Result<()> {
    let (posterior, _) = model(config)?;
    let path = config.inputs.as_ref().ok_or_else(|| Error::InvalidParameter("missing --inputs".into()))?;
    let x = ingest_inputs(path)?;
    let p = posterior.predict(&x, config.include_noise)?;
    let text = csv_text(
        &["x", "mean", "variance", "lower", "upper"],
        &[&x.column(0), &p.mean, &p.variance, &p.lower(), &p.upper()],
    );
    out.write("predictions.csv", &text, None)
}

fn sample(config: &CliConfig, out: &mut Output) -> Result<()> {
    let (spec, model_noise) = match (&config.kernel_file, &config.model) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            (from_text(&text)?, 0.0)
        }
        _ => {
            let (p, _) = model(config)?;
            (p.spec().clone(), p.noise_variance())
        }
    };
    let x = match &config.inputs {
        Some(path) => ingest_inputs(path)?,
        None => unit_grid(config.n.unwrap_or(100)),
    };
    let noise = config.noise.unwrap_or(model_noise);
    let draw_seed = seed::derive(config.seed, "sample");
    let draws = sample_prior_many(&spec, &x, noise, draw_seed, GpOptions::default().jitter, config.draws)?;
    let xs = x.column(0);
    let mut header = vec!["x".to_string()];
    header.extend((1..=draws.len()).map(|i| if draws.len() == 1 { "y".to_string() } else { format!("y{i}") }));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut cols: Vec<&[f64]> = vec![&xs];
    cols.extend(draws.iter().map(Vec::as_slice));
    out.write("samples.csv", &csv_text(&header, &cols), Some(draw_seed))
}

fn spectrum(config: &CliConfig, out: &mut Output) -> Result<()> {
    let (posterior, data) = model(config)?;
    let nyquist = match config.nyquist {
        Some(n) => n,
        None => default_nyquist(&data, 0)?,
    };
    let samples = spectrum_samples(posterior.spec(), nyquist, data.x.range(0))?;
    out.write("spectrum.csv", &pairs_csv(["freq", "log_density"], &samples), None)
}

/// Executes a parsed configuration and returns the artifacts written,
/// the manifest last.
pub fn dispatch(config: &CliConfig) -> Result<Vec<Artifact>> {
    let mut out = Output::open(&config.out)?;
    match config.command {
        Command::Run => run(config, &mut out)?,
        Command::Train => train_one(config, &mut out)?,
        Command::Predict => predict(config, &mut out)?,
        Command::Sample => sample(config, &mut out)?,
        Command::Spectrum => spectrum(config, &mut out)?,
    }
    out.finish(config)
}
