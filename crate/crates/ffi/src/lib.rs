//! C interface to `smgp`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`SmgpStatus`]; on failure the message is available from
//! [`smgp_last_error`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use smgp::gp::GpPosterior;
use smgp::kernel::{eval_kernel, format, spectral_density};
use smgp::optim::{train, Baseline, OptimConfig, Template};
use smgp::{Dataset, Error, GpOptions, Inputs, KernelSpec};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmgpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Numerical = 4,
    TrainingFailed = 5,
    Parse = 6,
    Io = 7,
    Panic = 8,
    Unsupported = 9,
}

/// A kernel specification.
pub struct SmgpKernel {
    spec: KernelSpec,
}

/// A fitted 1-D model together with its training data.
pub struct SmgpModel {
    posterior: GpPosterior,
    data: Dataset,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SmgpStatus {
    match err {
        Error::DimensionMismatch { .. } => SmgpStatus::DimensionMismatch,
        Error::IllConditioned { .. } => SmgpStatus::Numerical,
        Error::TrainingFailed { .. } => SmgpStatus::TrainingFailed,
        Error::Parse { .. } => SmgpStatus::Parse,
        Error::Io { .. } => SmgpStatus::Io,
        Error::Unsupported(_) => SmgpStatus::Unsupported,
        _ => SmgpStatus::InvalidArgument,
    }
}

struct Fail(SmgpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), format!("[{}] {e}", e.module()))
    }
}

fn null(what: &str) -> Fail {
    Fail(SmgpStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SmgpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmgpStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SmgpStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SmgpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn template_for(family: &str, components: usize) -> Result<Template, Fail> {
    Ok(match family.to_ascii_uppercase().as_str() {
        "SM" => Template::SpectralMixture { components },
        "SE" => Template::Baseline(Baseline::SquaredExponential),
        "MA" => Template::Baseline(Baseline::Matern),
        "RQ" => Template::Baseline(Baseline::RationalQuadratic),
        "PE" => Template::Baseline(Baseline::Periodic),
        other => {
            return Err(Fail(
                SmgpStatus::InvalidArgument,
                format!("unknown kernel family {other:?} (expected SM, SE, MA, RQ or PE)"),
            ))
        }
    })
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn smgp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn smgp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a kernel from the `key = value` text format.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_kernel_parse(source: *const c_char, out: *mut *mut SmgpKernel) -> SmgpStatus {
    guard(|| {
        let spec = format::from_text(text(source, "source")?)?;
        store(out, SmgpKernel { spec })
    })
}

/// Serializes a kernel; free the result with [`smgp_string_free`].
///
/// # Safety
/// `kernel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_kernel_to_text(kernel: *const SmgpKernel, out: *mut *mut c_char) -> SmgpStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let s = CString::new(format::to_text(&k.spec)).map_err(|e| Fail(SmgpStatus::Panic, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// `k(x, x2)` for two points of dimension `dim`.
///
/// # Safety
/// `x` and `x2` must hold `dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_kernel_eval(
    kernel: *const SmgpKernel,
    x: *const f64,
    x2: *const f64,
    dim: usize,
    out: *mut f64,
) -> SmgpStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let v = eval_kernel(&k.spec, slice(x, dim, "x")?, slice(x2, dim, "x2")?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Spectral density at frequency vector `s` of dimension `dim`.
///
/// # Safety
/// `s` must hold `dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_kernel_spectral_density(
    kernel: *const SmgpKernel,
    s: *const f64,
    dim: usize,
    out: *mut f64,
) -> SmgpStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let v = spectral_density(&k.spec, slice(s, dim, "s")?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// # Safety
/// `kernel` must come from this library or be null, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn smgp_kernel_free(kernel: *mut SmgpKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

unsafe fn dataset(x: *const f64, y: *const f64, n: usize) -> Result<Dataset, Fail> {
    let x = slice(x, n, "x")?;
    let y = slice(y, n, "y")?;
    Ok(Dataset::new(Inputs::from_1d(x), y.to_vec())?)
}

/// Conditions a GP with fixed hyperparameters on `n` 1-D points.
///
/// # Safety
/// `x` and `y` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_fit(
    kernel: *const SmgpKernel,
    noise_variance: f64,
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut *mut SmgpModel,
) -> SmgpStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let data = dataset(x, y, n)?;
        let posterior = GpPosterior::fit(k.spec.clone(), noise_variance, &data, GpOptions::default())?;
        store(out, SmgpModel { posterior, data })
    })
}

/// Learns hyperparameters by maximizing the marginal likelihood.
///
/// `family` is one of `SM`, `SE`, `MA`, `RQ`, `PE`; `components` is used by
/// `SM` only. `restarts = 0` selects the default count for the family.
///
/// # Safety
/// `family` must be NUL-terminated; `x` and `y` must hold `n` values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_train(
    family: *const c_char,
    components: usize,
    x: *const f64,
    y: *const f64,
    n: usize,
    seed: u64,
    restarts: usize,
    out: *mut *mut SmgpModel,
) -> SmgpStatus {
    guard(|| {
        let template = template_for(text(family, "family")?, components)?;
        let data = dataset(x, y, n)?;
        let config = OptimConfig {
            seed,
            restarts: (restarts > 0).then_some(restarts),
            ..OptimConfig::default()
        };
        let (posterior, _) = train(&template, &data, &config, &GpOptions::default())?;
        store(out, SmgpModel { posterior, data })
    })
}

/// Predictive mean and variance at `n` 1-D test inputs.
///
/// # Safety
/// `xstar`, `mean` and `variance` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_predict(
    model: *const SmgpModel,
    xstar: *const f64,
    n: usize,
    include_noise: bool,
    mean: *mut f64,
    variance: *mut f64,
) -> SmgpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let xs = Inputs::from_1d(slice(xstar, n, "xstar")?);
        let mean = slice_mut(mean, n, "mean")?;
        let variance = slice_mut(variance, n, "variance")?;
        let p = m.posterior.predict(&xs, include_noise)?;
        mean.copy_from_slice(&p.mean);
        variance.copy_from_slice(&p.variance);
        Ok(())
    })
}

/// Log marginal likelihood of the training data.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_log_marginal_likelihood(model: *const SmgpModel, out: *mut f64) -> SmgpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let v = m
            .posterior
            .log_marginal_likelihood()
            .ok_or_else(|| Fail(SmgpStatus::InvalidArgument, "model has no training data".into()))?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Noise variance of the model.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_noise_variance(model: *const SmgpModel, out: *mut f64) -> SmgpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.posterior.noise_variance();
        Ok(())
    })
}

/// Copies the model's kernel into a new handle.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_kernel(model: *const SmgpModel, out: *mut *mut SmgpKernel) -> SmgpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        store(out, SmgpKernel { spec: m.posterior.spec().clone() })
    })
}

/// Writes the model file at `path`, replacing it atomically.
///
/// # Safety
/// `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_save(model: *const SmgpModel, path: *const c_char) -> SmgpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let body = smgp::io::model_to_text(&m.posterior, &m.data)?;
        smgp::io::write_atomic(Path::new(text(path, "path")?), body.as_bytes())?;
        Ok(())
    })
}

/// Reads a model file written by [`smgp_model_save`] or the CLI.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_load(path: *const c_char, out: *mut *mut SmgpModel) -> SmgpStatus {
    guard(|| {
        let (posterior, data) = smgp::io::load_model(Path::new(text(path, "path")?))?;
        store(out, SmgpModel { posterior, data })
    })
}

/// # Safety
/// `model` must come from this library or be null, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn smgp_model_free(model: *mut SmgpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
