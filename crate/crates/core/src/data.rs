//! Input locations and targets.

use crate::error::{Error, Result};

/// Row-major N×P matrix of input locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    dim: usize,
    data: Vec<f64>,
}

impl Inputs {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("input dimension must be ≥ 1".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        Ok(Inputs { dim, data })
    }

    /// One-dimensional inputs.
    pub fn from_1d(xs: &[f64]) -> Self {
        Inputs {
            dim: 1,
            data: xs.to_vec(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Inputs::new(dim, data)
    }

    pub fn empty(dim: usize) -> Self {
        Inputs {
            dim,
            data: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Values of column `p`.
    pub fn column(&self, p: usize) -> Vec<f64> {
        self.rows().map(|r| r[p]).collect()
    }

    /// max − min along column `p`; zero for fewer than two rows.
    pub fn range(&self, p: usize) -> f64 {
        let col = self.column(p);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if col.len() < 2 {
            0.0
        } else {
            hi - lo
        }
    }

    /// Median gap between consecutive distinct sorted values of column `p`.
    pub fn median_spacing(&self, p: usize) -> Option<f64> {
        let mut col = self.column(p);
        col.sort_by(f64::total_cmp);
        let mut gaps: Vec<f64> = col
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|g| *g > 0.0)
            .collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_by(f64::total_cmp);
        let m = gaps.len();
        Some(if m % 2 == 1 {
            gaps[m / 2]
        } else {
            0.5 * (gaps[m / 2 - 1] + gaps[m / 2])
        })
    }

    /// Rows at the given indices, in order.
    pub fn select(&self, idx: &[usize]) -> Inputs {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Inputs {
            dim: self.dim,
            data,
        }
    }
}

/// Training targets plus an optional held-out partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Inputs,
    pub y: Vec<f64>,
    pub test: Option<(Inputs, Vec<f64>)>,
}

impl Dataset {
    pub fn new(x: Inputs, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(Dataset { x, y, test: None })
    }

    pub fn with_test(mut self, x: Inputs, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.dim() != self.x.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.x.dim(),
                found: x.dim(),
            });
        }
        self.test = Some((x, y));
        Ok(self)
    }

    /// Splits a series into its first `n_train` rows and the following `n_test` rows.
    pub fn split_head(x: &Inputs, y: &[f64], n_train: usize, n_test: usize) -> Result<Self> {
        if n_train + n_test > x.len() || x.len() != y.len() {
            return Err(Error::Data(format!(
                "need {} rows for a {n_train}/{n_test} split, have {}",
                n_train + n_test,
                x.len()
            )));
        }
        let train: Vec<usize> = (0..n_train).collect();
        let test: Vec<usize> = (n_train..n_train + n_test).collect();
        Dataset::new(x.select(&train), y[..n_train].to_vec())?
            .with_test(x.select(&test), y[n_train..n_train + n_test].to_vec())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Population variance (divide by N).
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|t| (t - m).powi(2)).sum::<f64>() / v.len() as f64
    }
}
