//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smgp::kernel::{KernelSpec, SmParams};
use smgp::{Dataset, Inputs};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss–Jordan inverse with partial pivoting, and `ln|det A|`.
pub fn dense_inverse(a: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut logdet = 0.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col];
        logdet += p.abs().ln();
        for j in 0..n {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = m[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[i][j] -= f * m[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    (inv, logdet)
}

pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

pub fn gaussian_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Symmetrized 1-D Gaussian-mixture spectral density written from scratch.
pub fn sm_density_oracle(w: &[f64], mu: &[f64], v: &[f64], s: f64) -> f64 {
    (0..w.len())
        .map(|q| w[q] * 0.5 * (gaussian_pdf(s, mu[q], v[q]) + gaussian_pdf(s, -mu[q], v[q])))
        .sum()
}

pub fn random_sm(rng: &mut ChaCha8Rng, q: usize, p: usize) -> SmParams {
    let w = (0..q).map(|_| rng.random_range(0.2..2.0)).collect();
    let mu = (0..q).map(|_| (0..p).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let v = (0..q).map(|_| (0..p).map(|_| rng.random_range(0.02..0.5)).collect()).collect();
    SmParams::new(w, mu, v).unwrap()
}

/// One instance of every kernel variant on 1-D inputs.
pub fn all_variants(rng: &mut ChaCha8Rng) -> Vec<(&'static str, KernelSpec)> {
    let mut u = |a: f64, b: f64| rng.random_range(a..b);
    let se = KernelSpec::se(u(0.5, 2.0));
    let ma = KernelSpec::matern32(u(0.5, 3.0), u(0.5, 2.0));
    let rq = KernelSpec::rq(u(0.5, 3.0), u(0.5, 2.0));
    let pe = KernelSpec::periodic(u(0.1, 0.5), u(0.5, 2.0));
    let ar1 = KernelSpec::ar1(u(0.05, 0.2));
    let scaled = KernelSpec::scaled(u(0.5, 3.0), KernelSpec::se(u(0.5, 2.0)));
    let sum = KernelSpec::Sum(vec![
        KernelSpec::scaled(u(0.5, 2.0), KernelSpec::rq(u(0.5, 3.0), u(1.0, 3.0))),
        KernelSpec::scaled(u(0.5, 2.0), KernelSpec::periodic(u(0.1, 0.4), u(0.5, 2.0))),
    ]);
    let mut r2 = ChaCha8Rng::seed_from_u64(u(0.0, 1e9) as u64);
    let sm = KernelSpec::sm(random_sm(&mut r2, 2, 1));
    vec![
        ("se", se),
        ("matern32", ma),
        ("rq", rq),
        ("periodic", pe),
        ("sm", sm),
        ("ar1", ar1),
        ("scaled", scaled),
        ("sum", sum),
    ]
}

/// Random 1-D dataset; integer inputs when `integer` is set.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, integer: bool) -> Dataset {
    let mut xs: Vec<f64> = if integer {
        let mut v: Vec<f64> = (0..3 * n).map(|i| i as f64).collect();
        for i in (1..v.len()).rev() {
            let j = rng.random_range(0..=i);
            v.swap(i, j);
        }
        v.truncate(n);
        v
    } else {
        (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()
    };
    xs.sort_by(f64::total_cmp);
    let ys = xs.iter().map(|x| (0.7 * x).sin() + rng.random_range(-0.3..0.3)).collect();
    Dataset::new(Inputs::from_1d(&xs), ys).unwrap()
}

/// Fourth-order central difference of `f` along coordinate `i`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let at = |d: f64| {
        let mut y = x.to_vec();
        y[i] += d;
        f(&y)
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}
