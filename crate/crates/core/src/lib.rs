//! Gaussian-process regression with spectral mixture kernels.
//!
//! The crate is organized bottom-up:
//!
//! - [`kernel`]: covariance functions, analytic gradients, spectral densities
//!   and the plain-text kernel format.
//! - [`gp`]: exact inference (marginal likelihood, gradients, prediction,
//!   prior sampling).
//! - [`optim`]: nonlinear conjugate gradients, initialization and multi-restart
//!   training.
//! - [`experiments`]: data generators, train/test protocols and metrics.
//! - [`cli`]: command-line configuration, CSV ingestion and artifact output.

pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod gp;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod optim;
pub mod seed;

pub use data::{Dataset, Inputs};
pub use error::{Error, Result};
pub use gp::{GpOptions, GpPosterior, PredictiveDistribution};
pub use kernel::{KernelSpec, SmParams};
