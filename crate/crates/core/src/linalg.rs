//! Dense Cholesky factorization with diagonal jitter escalation.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, Par, Side};

use crate::error::{Error, Result};

/// Diagonal inflation schedule, relative to the mean diagonal entry.
///
/// Levels are `start, 10·start, 100·start, …` up to `max`. A zero start
/// tries the exact matrix first and then escalates from `1e−10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPolicy {
    pub start: f64,
    pub max: f64,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            start: 1e-10,
            max: 1e-4,
        }
    }
}

impl JitterPolicy {
    /// Only the exact matrix; factorization failure is an error.
    pub const fn exact() -> Self {
        JitterPolicy { start: 0.0, max: 0.0 }
    }

    pub fn levels(&self) -> Vec<f64> {
        let mut out = vec![self.start];
        let mut cur = if self.start == 0.0 { 1e-10 } else { self.start * 10.0 };
        while cur <= self.max * (1.0 + 1e-12) {
            out.push(cur);
            cur *= 10.0;
        }
        out
    }
}

/// Lower Cholesky factor of `A + jitter·I`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Mat<f64>,
    llt: faer::linalg::solvers::Llt<f64>,
    jitter: f64,
}

impl Cholesky {
    /// Factors a symmetric matrix, escalating jitter under `policy`.
    /// The jitter scale is the mean diagonal entry (or 1 when that is zero).
    pub fn factor(a: &Mat<f64>, policy: JitterPolicy) -> Result<Self> {
        let n = a.nrows();
        let mean_diag = if n == 0 {
            0.0
        } else {
            (0..n).map(|i| a[(i, i)]).sum::<f64>() / n as f64
        };
        let scale = if mean_diag > 0.0 && mean_diag.is_finite() { mean_diag } else { 1.0 };
        let mut tried = Vec::new();
        for rel in policy.levels() {
            let jitter = rel * scale;
            tried.push(jitter);
            let mut m = a.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Ok(llt) = m.llt(Side::Lower) {
                let l = llt.L().to_owned();
                if (0..n).all(|i| l[(i, i)].is_finite() && l[(i, i)] > 0.0) {
                    return Ok(Cholesky { l, llt, jitter });
                }
            }
        }
        Err(Error::IllConditioned { jitters: tried })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Absolute jitter added to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self) -> &Mat<f64> {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    /// `A⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.llt.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// `L⁻¹ B` for a column block `B`.
    pub fn solve_lower(&self, b: &Mat<f64>) -> Mat<f64> {
        let mut x = b.clone();
        faer::linalg::triangular_solve::solve_lower_triangular_in_place(self.l.as_ref(), x.as_mut(), Par::Seq);
        x
    }

    /// `A⁻¹`.
    pub fn inverse(&self) -> Mat<f64> {
        self.llt.inverse()
    }

    /// `L z`.
    pub fn mul_lower(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..=i).map(|j| self.l[(i, j)] * z[j]).sum())
            .collect()
    }
}
