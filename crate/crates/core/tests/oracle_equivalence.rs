mod common;

use common::*;
use rand::Rng;
use smgp::gp::{build_gram, log_marginal_likelihood, GpOptions, GpPosterior};
use smgp::kernel::{eval_kernel, KernelSpec};
use smgp::linalg::JitterPolicy;
use smgp::Inputs;

fn gram(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|x| b.iter().map(|y| eval_kernel(spec, &[*x], &[*y]).unwrap()).collect())
        .collect()
}

fn exact() -> GpOptions {
    GpOptions {
        jitter: JitterPolicy::exact(),
        ..GpOptions::default()
    }
}

#[test]
fn lml_and_prediction_match_full_inversion() {
    let mut r = rng(21);
    for trial in 0..12 {
        let n = r.random_range(2..=10);
        let kernels = all_variants(&mut r);
        let (name, spec) = &kernels[trial % kernels.len()];
        let data = random_dataset(&mut r, n, trial % 2 == 0 || *name == "ar1");
        let noise = r.random_range(0.01..0.5);
        let xs = data.x.column(0);
        let mean = data.y.iter().sum::<f64>() / n as f64;
        let resid: Vec<f64> = data.y.iter().map(|y| y - mean).collect();

        let mut k = gram(spec, &xs, &xs);
        for (i, row) in k.iter_mut().enumerate() {
            row[i] += noise;
        }
        let (inv, logdet) = dense_inverse(&k);
        let alpha = mat_vec(&inv, &resid);
        let quad: f64 = resid.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let oracle = -0.5 * quad - 0.5 * logdet - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        let lml = log_marginal_likelihood(spec, noise, &data, &exact()).unwrap();
        assert!((lml - oracle).abs() < 1e-8, "{name}: {lml} vs {oracle}");

        let xstar: Vec<f64> = if *name == "ar1" {
            vec![xs[0] + 1.0, xs[n - 1] + 2.0]
        } else {
            (0..4).map(|_| r.random_range(-6.0..6.0)).collect()
        };
        let post = GpPosterior::fit(spec.clone(), noise, &data, exact()).unwrap();
        let pred = post.predict(&Inputs::from_1d(&xstar), false).unwrap();
        let ks = gram(spec, &xstar, &xs);
        for (j, row) in ks.iter().enumerate() {
            let m: f64 = mean + row.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
            let tmp = mat_vec(&inv, row);
            let v = eval_kernel(spec, &[xstar[j]], &[xstar[j]]).unwrap() - row.iter().zip(&tmp).map(|(a, b)| a * b).sum::<f64>();
            assert!((pred.mean[j] - m).abs() < 1e-8, "{name}: mean {} vs {m}", pred.mean[j]);
            assert!((pred.variance[j] - v).abs() < 1e-8, "{name}: var {} vs {v}", pred.variance[j]);
        }
    }
}

#[test]
fn cross_gram_matches_pointwise_kernel() {
    let spec = KernelSpec::scaled(2.0, KernelSpec::rq(1.5, 0.7));
    let a = [0.0, 0.3, -1.2];
    let b = [2.0, 0.1];
    let k = build_gram(&spec, &Inputs::from_1d(&a), &Inputs::from_1d(&b)).unwrap();
    let o = gram(&spec, &a, &b);
    for i in 0..3 {
        for j in 0..2 {
            assert_eq!(k[(i, j)], o[i][j]);
        }
    }
}

#[test]
fn prior_density_of_training_targets_equals_lml() {
    let mut r = rng(22);
    let data = random_dataset(&mut r, 10, false);
    let spec = KernelSpec::matern32(1.5, 0.8);
    let opts = GpOptions::default();
    let lml = log_marginal_likelihood(&spec, 0.1, &data, &opts).unwrap();
    let offset = data.y.iter().sum::<f64>() / 10.0;
    let prior = GpPosterior::prior(spec, 0.1, 1, offset, opts);
    let lpd = prior.log_predictive_density(&data.x, &data.y).unwrap();
    assert_eq!(lpd, lml);
}
