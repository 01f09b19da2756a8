//! Flat unconstrained hyperparameter vectors.

use super::{KernelSpec, ParamKind};
use crate::error::{Error, Result};

/// Smallest magnitude mapped through `ln`; zero weights land here.
const LOG_FLOOR: f64 = 1e-300;
/// Keeps logistic-mapped frequencies off the saturated ends.
const LOGISTIC_MARGIN: f64 = 1e-9;

/// Optimization coordinate for spectral-mixture frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FrequencyTransform {
    #[default]
    Unconstrained,
    /// `μ = upper · logistic(u)`, confining frequencies to `(0, upper)`.
    Logistic { upper: f64 },
}

/// Map from one unconstrained coordinate to its constrained parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Log { name: String },
    /// `value = floor + exp(u)`.
    ShiftedLog { name: String, floor: f64 },
    Identity { name: String },
    Logistic { name: String, upper: f64 },
}

impl Slot {
    pub fn name(&self) -> &str {
        match self {
            Slot::Log { name } | Slot::ShiftedLog { name, .. } | Slot::Identity { name } | Slot::Logistic { name, .. } => name,
        }
    }

    fn forward(&self, constrained: f64) -> f64 {
        match self {
            Slot::Log { .. } => constrained.max(LOG_FLOOR).ln(),
            Slot::ShiftedLog { floor, .. } => (constrained - floor).max(LOG_FLOOR).ln(),
            Slot::Identity { .. } => constrained,
            Slot::Logistic { upper, .. } => {
                let r = (constrained.abs() / upper).clamp(LOGISTIC_MARGIN, 1.0 - LOGISTIC_MARGIN);
                (r / (1.0 - r)).ln()
            }
        }
    }

    fn inverse(&self, u: f64) -> f64 {
        match self {
            Slot::Log { .. } => u.exp(),
            Slot::ShiftedLog { floor, .. } => floor + u.exp(),
            Slot::Identity { .. } => u,
            Slot::Logistic { upper, .. } => upper * logistic(u),
        }
    }

    /// `∂(natural coordinate)/∂u`, where the natural coordinate is the one
    /// kernel gradients are expressed in (log for positive, raw for frequency).
    fn chain(&self, u: f64) -> f64 {
        match self {
            Slot::Log { .. } | Slot::Identity { .. } => 1.0,
            Slot::ShiftedLog { floor, .. } => {
                let e = u.exp();
                e / (floor + e)
            }
            Slot::Logistic { upper, .. } => {
                let s = logistic(u);
                upper * s * (1.0 - s)
            }
        }
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Kernel hyperparameters followed by `log σ_n²`, with the layout needed to
/// map them back.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperVector {
    pub values: Vec<f64>,
    slots: Vec<Slot>,
    template: KernelSpec,
}

impl HyperVector {
    pub fn flatten(spec: &KernelSpec, noise_variance: f64, frequencies: FrequencyTransform) -> Result<Self> {
        Self::flatten_with_noise_floor(spec, noise_variance, frequencies, 0.0)
    }

    /// Like [`flatten`](Self::flatten), with the noise variance kept above
    /// `noise_floor` through `σ² = floor + exp(u)`.
    pub fn flatten_with_noise_floor(
        spec: &KernelSpec,
        noise_variance: f64,
        frequencies: FrequencyTransform,
        noise_floor: f64,
    ) -> Result<Self> {
        spec.validate()?;
        if !(noise_floor.is_finite() && noise_floor >= 0.0 && noise_floor < noise_variance.max(f64::MIN_POSITIVE)) {
            return Err(Error::InvalidParameter(format!(
                "noise floor {noise_floor} must be ≥ 0 and below the noise variance {noise_variance}"
            )));
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be ≥ 0, got {noise_variance}"
            )));
        }
        if let FrequencyTransform::Logistic { upper } = frequencies {
            if !(upper.is_finite() && upper > 0.0) {
                return Err(Error::InvalidParameter(format!("frequency cap must be > 0, got {upper}")));
            }
        }
        let mut slots: Vec<Slot> = spec
            .params()
            .into_iter()
            .map(|p| match (p.kind, frequencies) {
                (ParamKind::Positive, _) => Slot::Log { name: p.name },
                (ParamKind::Frequency, FrequencyTransform::Unconstrained) => Slot::Identity { name: p.name },
                (ParamKind::Frequency, FrequencyTransform::Logistic { upper }) => {
                    Slot::Logistic { name: p.name, upper }
                }
            })
            .collect();
        let name = "noise_variance".to_string();
        slots.push(if noise_floor > 0.0 {
            Slot::ShiftedLog { name, floor: noise_floor }
        } else {
            Slot::Log { name }
        });
        let values = spec
            .params()
            .iter()
            .map(|p| p.value)
            .chain(std::iter::once(noise_variance))
            .zip(&slots)
            .map(|(v, s)| s.forward(v))
            .collect();
        Ok(HyperVector {
            values,
            slots,
            template: spec.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn template(&self) -> &KernelSpec {
        &self.template
    }

    /// Same layout, different coordinates.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.slots.len() {
            return Err(Error::DimensionMismatch {
                expected: self.slots.len(),
                found: values.len(),
            });
        }
        Ok(HyperVector {
            values,
            slots: self.slots.clone(),
            template: self.template.clone(),
        })
    }

    /// Constrained kernel and noise variance for the current coordinates.
    pub fn unflatten(&self) -> Result<(KernelSpec, f64)> {
        self.decode(&self.values)
    }

    /// Constrained kernel and noise variance for arbitrary coordinates in this layout.
    pub fn decode(&self, values: &[f64]) -> Result<(KernelSpec, f64)> {
        if values.len() != self.slots.len() {
            return Err(Error::DimensionMismatch {
                expected: self.slots.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite hyperparameter coordinate".into()));
        }
        let constrained: Vec<f64> = values.iter().zip(&self.slots).map(|(u, s)| s.inverse(*u)).collect();
        let (kernel, noise) = constrained.split_at(constrained.len() - 1);
        Ok((self.template.with_params(kernel)?, noise[0]))
    }

    /// Per-coordinate factors turning natural-coordinate gradients into
    /// gradients with respect to `values`.
    pub fn chain_factors(&self, values: &[f64]) -> Vec<f64> {
        values.iter().zip(&self.slots).map(|(u, s)| s.chain(*u)).collect()
    }
}
