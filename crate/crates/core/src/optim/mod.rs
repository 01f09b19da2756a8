//! Marginal-likelihood training.

mod cg;
mod init;
mod train;

pub use cg::{minimize_cg, CgConfig, CgOutcome, Termination};
pub use init::{default_nyquist, dominant_autocorrelation_lag, init_baseline, init_sm_random, Baseline};
pub use train::{train, OptimConfig, OptimResult, RestartTrace, Template, DEFAULT_NOISE_FLOOR};
