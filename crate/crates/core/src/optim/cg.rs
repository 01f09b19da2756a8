//! Polak–Ribière+ nonlinear conjugate gradients with a strong Wolfe line search.

use std::fmt;

/// Why a minimization run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    GradientTolerance,
    ObjectiveChange,
    MaxIterations,
    MaxEvaluations,
    LineSearchFailed,
    /// The objective could not be evaluated at the starting point.
    Aborted(String),
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::GradientTolerance => f.write_str("gradient-tolerance"),
            Termination::ObjectiveChange => f.write_str("objective-change"),
            Termination::MaxIterations => f.write_str("max-iterations"),
            Termination::MaxEvaluations => f.write_str("max-evaluations"),
            Termination::LineSearchFailed => f.write_str("line-search-failed"),
            Termination::Aborted(why) => write!(f, "aborted ({why})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub max_iterations: usize,
    /// Stop once the gradient 2-norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop once `|Δf| ≤ tol · max(|f|, 1)`.
    pub objective_tolerance: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search_evaluations: usize,
    /// Total objective evaluations allowed.
    pub max_evaluations: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            max_iterations: 1000,
            gradient_tolerance: 1e-6,
            objective_tolerance: 1e-9,
            c1: 1e-4,
            c2: 0.1,
            max_line_search_evaluations: 25,
            max_evaluations: usize::MAX,
        }
    }
}

/// Result of one minimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub initial_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Probe {
    alpha: f64,
    value: f64,
    grad: Vec<f64>,
    slope: f64,
}

/// Minimizer of the cubic through `(a, fa, ga)` and `(b, fb, gb)`,
/// safeguarded to the interior of the interval.
fn cubic_step(a: f64, fa: f64, ga: f64, b: f64, fb: f64, gb: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let width = hi - lo;
    let d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - ga * gb;
    let guess = if disc >= 0.0 {
        let d2 = disc.sqrt() * (b - a).signum();
        b - (b - a) * ((gb + d2 - d1) / (gb - ga + 2.0 * d2))
    } else {
        f64::NAN
    };
    if guess.is_finite() {
        guess.clamp(lo + 1e-3 * width, hi - 1e-3 * width)
    } else {
        0.5 * (lo + hi)
    }
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    evaluations: usize,
}

impl<F> LineSearch<'_, F>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), String>,
{
    fn probe(&mut self, alpha: f64) -> Option<Probe> {
        self.evaluations += 1;
        let trial: Vec<f64> = self.x.iter().zip(self.dir).map(|(x, d)| x + alpha * d).collect();
        match (self.objective)(&trial) {
            Ok((value, grad)) if value.is_finite() && grad.iter().all(|g| g.is_finite()) => {
                let slope = dot(&grad, self.dir);
                Some(Probe {
                    alpha,
                    value,
                    grad,
                    slope,
                })
            }
            _ => None,
        }
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    /// Returns an accepted probe; `None` only if no point with sufficient
    /// decrease was found.
    fn run(&mut self, mut alpha: f64) -> Option<Probe> {
        let mut prev = Probe {
            alpha: 0.0,
            value: self.f0,
            grad: Vec::new(),
            slope: self.slope0,
        };
        let mut first = true;
        while self.evaluations < self.budget {
            let Some(cur) = self.probe(alpha) else {
                // unevaluable trial: pull back toward the last good point
                alpha = prev.alpha + 0.1 * (alpha - prev.alpha);
                continue;
            };
            if !self.armijo(&cur) || (!first && cur.value >= prev.value) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Some(cur);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            first = false;
            alpha = (cur.alpha * 4.0).min(1e12);
            prev = cur;
        }
        (prev.alpha > 0.0).then_some(prev)
    }

    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        while self.evaluations < self.budget {
            let width = (hi.alpha - lo.alpha).abs();
            if width <= 1e-14 * lo.alpha.abs().max(hi.alpha.abs()).max(1e-300) {
                break;
            }
            let alpha = if !hi.value.is_finite() {
                0.5 * (lo.alpha + hi.alpha)
            } else {
                cubic_step(lo.alpha, lo.value, lo.slope, hi.alpha, hi.value, hi.slope)
            };
            let Some(cur) = self.probe(alpha) else {
                hi = Probe {
                    alpha,
                    value: f64::INFINITY,
                    grad: Vec::new(),
                    slope: f64::NAN,
                };
                continue;
            };
            if !self.armijo(&cur) || cur.value >= lo.value {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Some(cur);
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
        (lo.alpha > 0.0).then_some(lo)
    }
}

/// Minimizes `objective` from `x0`.
///
/// `objective` returns the value and gradient, or an error string when the
/// point cannot be evaluated. Failures at trial points shrink the step; a
/// failure at `x0` aborts the run.
pub fn minimize_cg<F>(mut objective: F, x0: &[f64], cfg: &CgConfig) -> CgOutcome
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), String>,
{
    let n = x0.len();
    let (mut f, mut g) = match objective(x0) {
        Ok((v, g)) if v.is_finite() && g.iter().all(|t| t.is_finite()) => (v, g),
        Ok(_) => {
            return CgOutcome {
                x: x0.to_vec(),
                value: f64::NAN,
                gradient: Vec::new(),
                initial_value: f64::NAN,
                iterations: 0,
                evaluations: 1,
                termination: Termination::Aborted("non-finite objective at start".into()),
            }
        }
        Err(why) => {
            return CgOutcome {
                x: x0.to_vec(),
                value: f64::NAN,
                gradient: Vec::new(),
                initial_value: f64::NAN,
                iterations: 0,
                evaluations: 1,
                termination: Termination::Aborted(why),
            }
        }
    };
    let initial_value = f;
    let mut x = x0.to_vec();
    let mut evaluations = 1;
    let mut dir: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut since_restart = 0;
    let mut last_step: Option<(f64, f64)> = None;
    let mut iterations = 0;

    let termination = loop {
        if norm(&g) <= cfg.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= cfg.max_iterations {
            break Termination::MaxIterations;
        }
        if evaluations >= cfg.max_evaluations {
            break Termination::MaxEvaluations;
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 || since_restart >= n {
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            since_restart = 0;
        }
        let alpha0 = match last_step {
            Some((alpha, prev_slope)) => (alpha * prev_slope / slope).clamp(1e-10, 1e10),
            None => (1.0 / norm(&g)).min(1.0),
        };
        let budget = cfg.max_line_search_evaluations.min(cfg.max_evaluations - evaluations);
        let mut ls = LineSearch {
            objective: &mut objective,
            x: &x,
            dir: &dir,
            f0: f,
            slope0: slope,
            c1: cfg.c1,
            c2: cfg.c2,
            budget,
            evaluations: 0,
        };
        let accepted = ls.run(alpha0);
        evaluations += ls.evaluations;
        let Some(step) = accepted else {
            if since_restart > 0 {
                // retry once along steepest descent
                since_restart = n;
                last_step = None;
                continue;
            }
            break Termination::LineSearchFailed;
        };
        debug_assert!(
            step.value <= f + cfg.c1 * step.alpha * slope + 1e-12 * f.abs(),
            "accepted step violates sufficient decrease"
        );
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi += step.alpha * di;
        }
        iterations += 1;
        since_restart += 1;
        let change = (f - step.value).abs();
        let scale = f.abs().max(step.value.abs()).max(1.0);
        let gg = dot(&g, &g);
        let beta = (dot(&step.grad, &step.grad) - dot(&step.grad, &g)) / gg;
        let beta = beta.max(0.0);
        f = step.value;
        g = step.grad;
        last_step = Some((step.alpha, slope));
        if change <= cfg.objective_tolerance * scale {
            break Termination::ObjectiveChange;
        }
        for (d, gi) in dir.iter_mut().zip(&g) {
            *d = -gi + beta * *d;
        }
    };
    CgOutcome {
        x,
        value: f,
        gradient: g,
        initial_value,
        iterations,
        evaluations,
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Result<(f64, Vec<f64>), String> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok((f, g))
    }

    #[test]
    fn quadratic_is_solved_exactly() {
        // A = tridiag(−1, 4, −1) + rank one, SPD
        let dim: usize = 5;
        let a: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let base = if i == j { 4.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 };
                        base + 0.1 * (i + 1) as f64 * (j + 1) as f64 / 5.0
                    })
                    .collect()
            })
            .collect();
        let b = [1.0, -2.0, 0.5, 3.0, -1.0];
        let quad = |x: &[f64]| -> Result<(f64, Vec<f64>), String> {
            let ax: Vec<f64> = a.iter().map(|row| dot(row, x)).collect();
            Ok((0.5 * dot(x, &ax) - dot(&b, x), ax.iter().zip(&b).map(|(p, q)| p - q).collect()))
        };
        let cfg = CgConfig {
            c2: 1e-8,
            gradient_tolerance: 1e-12,
            objective_tolerance: 0.0,
            ..CgConfig::default()
        };
        let out = minimize_cg(quad, &[0.0; 5], &cfg);
        // exact minimizer by Gaussian elimination
        let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, bi)| r.iter().copied().chain([bi]).collect()).collect();
        for c in 0..dim {
            for r in c + 1..dim {
                let f = m[r][c] / m[c][c];
                for k in c..=dim {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let mut sol = vec![0.0; dim];
        for r in (0..dim).rev() {
            sol[r] = (m[r][dim] - (r + 1..dim).map(|k| m[r][k] * sol[k]).sum::<f64>()) / m[r][r];
        }
        for (xi, si) in out.x.iter().zip(&sol) {
            assert!((xi - si).abs() < 1e-8, "{:?} vs {:?}", out.x, sol);
        }
        assert!(out.iterations <= 5 * dim, "{} iterations", out.iterations);
    }

    #[test]
    fn rosenbrock_converges() {
        let cfg = CgConfig {
            max_iterations: 10_000,
            gradient_tolerance: 1e-10,
            objective_tolerance: 0.0,
            ..CgConfig::default()
        };
        let out = minimize_cg(rosenbrock, &[-1.2, 1.0], &cfg);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4, "{out:?}");
        assert!(out.value <= out.initial_value);
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let out = minimize_cg(rosenbrock, &[1.0, 1.0], &CgConfig::default());
        assert_eq!(out.iterations, 0);
        assert_eq!(out.termination, Termination::GradientTolerance);
    }

    #[test]
    fn failure_at_start_aborts() {
        let out = minimize_cg(|_| Err("boom".to_string()), &[0.0], &CgConfig::default());
        assert!(matches!(out.termination, Termination::Aborted(_)));
        let out = minimize_cg(|_| Ok((f64::NAN, vec![0.0])), &[0.0], &CgConfig::default());
        assert!(matches!(out.termination, Termination::Aborted(_)));
    }

    #[test]
    fn unevaluable_region_is_avoided() {
        // f = (x − 3)² but undefined beyond x = 2: minimum on the boundary side
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>), String> {
            if x[0] > 2.0 {
                Err("outside domain".into())
            } else {
                Ok(((x[0] - 3.0).powi(2), vec![2.0 * (x[0] - 3.0)]))
            }
        };
        let out = minimize_cg(f, &[0.0], &CgConfig::default());
        assert!(out.value < 9.0 && out.x[0] <= 2.0);
    }
}
