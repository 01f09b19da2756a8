//! Synthetic generators, experiment protocols, metrics and plot data.

mod export;
mod generators;
mod metrics;
mod protocol;

pub use export::{
    correlation_samples, dominant_peak, local_peaks, spectral_density_1d, spectrum_samples, spectrum_upper,
    CORRELATION_POINTS, LOG_DENSITY_FLOOR, SPECTRUM_POINTS,
};
pub use generators::{
    generate_ar1, generate_from_kernel, generate_sinc, matern_preset, rqpe_preset, sinc, sinc_pattern, unit_grid,
    SINC_GAP,
};
pub use metrics::{band_coverage, compute_metrics, mean_squared_error, MetricsEntry};
pub use protocol::{
    load_dataset, run_experiment, ExperimentConfig, ExperimentId, ExperimentReport, KernelFamily, KernelReport,
    KernelResult, PredictionCurve, EFFECTIVE_WEIGHT, NEGCOV_SIGMA, RECOVERY_NOISE,
};
