//! Plain-text `key = value` serialization.
//!
//! One entry per line; `#` starts a comment. A kernel is written under a
//! key prefix (`kernel` by default):
//!
//! ```text
//! kernel = scaled
//! kernel.scale = 9
//! kernel.inner = se
//! kernel.inner.lengthscale = 10
//! ```
//!
//! | type       | fields                                                        |
//! |------------|---------------------------------------------------------------|
//! | `se`       | `lengthscale`                                                 |
//! | `matern32` | `amplitude`, `lengthscale`                                    |
//! | `rq`       | `alpha`, `lengthscale`                                        |
//! | `periodic` | `frequency`, `lengthscale`                                    |
//! | `sm`       | `components`, `dim`, `weight.<q>`, `mean.<q>.<p>`, `variance.<q>.<p>` |
//! | `ar1`      | `sigma`                                                       |
//! | `scaled`   | `scale`, `inner` (a nested kernel)                            |
//! | `sum`      | `terms`, `<i>` (nested kernels)                               |
//!
//! Floats are written in Rust's shortest round-trip form, so a
//! write/read cycle reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{KernelSpec, SmParams};
use crate::error::{Error, Result};

/// Parsed `key = value` lines, remembering line numbers and which keys
/// have been read.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    context: String,
    entries: BTreeMap<String, (usize, String)>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl KeyValues {
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(context, i + 1, format!("expected `key = value`, got `{line}`")))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(context, i + 1, "empty key"));
            }
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::parse(context, i + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(KeyValues {
            context: context.to_string(),
            entries,
            used: Default::default(),
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let (_, v) = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some(&(line, ref v)) = self.entries.get(key) else {
            return Ok(None);
        };
        self.used.borrow_mut().insert(key.to_string());
        v.parse()
            .map(Some)
            .map_err(|_| Error::parse(&self.context, line, format!("invalid value `{v}` for `{key}`")))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::parse(&self.context, 0, format!("missing key `{key}`")))
    }

    /// Fails on the first key that was never read.
    pub fn reject_unused(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some((k, (line, _))) => Err(Error::parse(&self.context, *line, format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Appends the lines describing `spec` under `prefix`.
pub fn write_kernel(spec: &KernelSpec, prefix: &str, out: &mut String) {
    let mut line = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{prefix}{k} = {v}");
    };
    match spec {
        KernelSpec::SquaredExponential { lengthscale } => {
            line("", &"se");
            line(".lengthscale", lengthscale);
        }
        KernelSpec::Matern32 {
            amplitude,
            lengthscale,
        } => {
            line("", &"matern32");
            line(".amplitude", amplitude);
            line(".lengthscale", lengthscale);
        }
        KernelSpec::RationalQuadratic { alpha, lengthscale } => {
            line("", &"rq");
            line(".alpha", alpha);
            line(".lengthscale", lengthscale);
        }
        KernelSpec::Periodic {
            frequency,
            lengthscale,
        } => {
            line("", &"periodic");
            line(".frequency", frequency);
            line(".lengthscale", lengthscale);
        }
        KernelSpec::SpectralMixture(p) => {
            line("", &"sm");
            line(".components", &p.num_components());
            line(".dim", &p.dim());
            for (q, w) in p.weights.iter().enumerate() {
                line(&format!(".weight.{q}"), w);
            }
            for (q, row) in p.means.iter().enumerate() {
                for (d, m) in row.iter().enumerate() {
                    line(&format!(".mean.{q}.{d}"), m);
                }
            }
            for (q, row) in p.variances.iter().enumerate() {
                for (d, v) in row.iter().enumerate() {
                    line(&format!(".variance.{q}.{d}"), v);
                }
            }
        }
        KernelSpec::Ar1 { sigma } => {
            line("", &"ar1");
            line(".sigma", sigma);
        }
        KernelSpec::Scaled { scale, inner } => {
            line("", &"scaled");
            line(".scale", scale);
            write_kernel(inner, &format!("{prefix}.inner"), out);
        }
        KernelSpec::Sum(terms) => {
            line("", &"sum");
            line(".terms", &terms.len());
            for (i, t) in terms.iter().enumerate() {
                write_kernel(t, &format!("{prefix}.{i}"), out);
            }
        }
    }
}

/// Reads the kernel stored under `prefix`.
pub fn read_kernel(kv: &KeyValues, prefix: &str) -> Result<KernelSpec> {
    let field = |name: &str| -> Result<f64> { kv.require(&format!("{prefix}.{name}")) };
    let kind: String = kv.require(prefix)?;
    let spec = match kind.as_str() {
        "se" => KernelSpec::se(field("lengthscale")?),
        "matern32" => KernelSpec::matern32(field("amplitude")?, field("lengthscale")?),
        "rq" => KernelSpec::rq(field("alpha")?, field("lengthscale")?),
        "periodic" => KernelSpec::periodic(field("frequency")?, field("lengthscale")?),
        "ar1" => KernelSpec::ar1(field("sigma")?),
        "sm" => {
            let q: usize = kv.require(&format!("{prefix}.components"))?;
            let d: usize = kv.require(&format!("{prefix}.dim"))?;
            let weights = (0..q).map(|i| field(&format!("weight.{i}"))).collect::<Result<_>>()?;
            let grid = |name: &str| -> Result<Vec<Vec<f64>>> {
                (0..q)
                    .map(|i| (0..d).map(|j| field(&format!("{name}.{i}.{j}"))).collect())
                    .collect()
            };
            KernelSpec::sm(SmParams::new(weights, grid("mean")?, grid("variance")?)?)
        }
        "scaled" => KernelSpec::scaled(field("scale")?, read_kernel(kv, &format!("{prefix}.inner"))?),
        "sum" => {
            let n: usize = kv.require(&format!("{prefix}.terms"))?;
            KernelSpec::Sum(
                (0..n)
                    .map(|i| read_kernel(kv, &format!("{prefix}.{i}")))
                    .collect::<Result<_>>()?,
            )
        }
        other => {
            return Err(Error::Data(format!("unknown kernel type `{other}` at `{prefix}`")));
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Serializes a kernel on its own under the `kernel` prefix.
pub fn to_text(spec: &KernelSpec) -> String {
    let mut out = String::new();
    write_kernel(spec, "kernel", &mut out);
    out
}

/// Parses text produced by [`to_text`]; unknown keys are rejected.
pub fn from_text(text: &str) -> Result<KernelSpec> {
    let kv = KeyValues::parse(text, "kernel")?;
    let spec = read_kernel(&kv, "kernel")?;
    kv.reject_unused()?;
    Ok(spec)
}
