mod common;

use common::*;
use rand::Rng;
use smgp::gp::{lml_and_gradient, log_marginal_likelihood, GpOptions};
use smgp::kernel::{eval_kernel, kernel_gradient, FrequencyTransform, HyperVector, KernelSpec};
use smgp::Dataset;

const TOL: f64 = 1e-5;

fn check_lml_gradient(name: &str, hyper: &HyperVector, data: &Dataset, opts: &GpOptions) {
    let (_, analytic) = lml_and_gradient(hyper, data, opts).unwrap();
    let f = |u: &[f64]| {
        let (spec, noise) = hyper.decode(u).unwrap();
        log_marginal_likelihood(&spec, noise, data, opts).unwrap()
    };
    let fd: Vec<f64> = (0..hyper.len())
        .map(|i| central_difference(&f, &hyper.values, i, 1e-4))
        .collect();
    let err = relative_error(&analytic, &fd);
    assert!(err < TOL, "{name}: relative error {err:e}\n analytic {analytic:?}\n fd {fd:?}");
}

#[test]
fn lml_gradient_matches_finite_differences_for_every_variant() {
    let start = std::time::Instant::now();
    let opts = GpOptions::default();
    for seed in 0..3 {
        let mut r = rng(100 + seed);
        for (name, spec) in all_variants(&mut r) {
            let integer = name == "ar1" || seed == 2;
            let n = r.random_range(20..=50);
            let data = random_dataset(&mut r, n, integer);
            let noise = r.random_range(0.05..0.5);
            let hyper = HyperVector::flatten(&spec, noise, FrequencyTransform::Unconstrained).unwrap();
            check_lml_gradient(name, &hyper, &data, &opts);
        }
    }
    assert!(start.elapsed().as_secs() < 30);
}

#[test]
fn lml_gradient_with_logistic_frequencies_and_noise_floor() {
    let mut r = rng(7);
    let data = random_dataset(&mut r, 40, false);
    let spec = KernelSpec::sm(random_sm(&mut r, 3, 1));
    for (floor, transform) in [
        (0.0, FrequencyTransform::Logistic { upper: 1.5 }),
        (0.05, FrequencyTransform::Unconstrained),
        (0.05, FrequencyTransform::Logistic { upper: 1.5 }),
    ] {
        let hyper = HyperVector::flatten_with_noise_floor(&spec, 0.2, transform, floor).unwrap();
        check_lml_gradient("sm transformed", &hyper, &data, &GpOptions::default());
    }
    let uncentered = GpOptions {
        center_targets: false,
        ..GpOptions::default()
    };
    let hyper = HyperVector::flatten(&spec, 0.2, FrequencyTransform::Unconstrained).unwrap();
    check_lml_gradient("sm uncentered", &hyper, &data, &uncentered);
}

#[test]
fn lml_gradient_on_regular_grids() {
    let mut r = rng(8);
    let xs: Vec<f64> = (0..45).filter(|i| i % 7 != 3).map(|i| -15.0 + 0.03 * (i as f64 + 0.5)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
    let data = Dataset::new(smgp::Inputs::from_1d(&xs), ys).unwrap();
    for (name, spec) in all_variants(&mut r) {
        if name == "ar1" {
            continue;
        }
        let hyper = HyperVector::flatten(&spec, 0.1, FrequencyTransform::Unconstrained).unwrap();
        check_lml_gradient(name, &hyper, &data, &GpOptions::default());
    }
}

#[test]
fn kernel_gradient_matches_finite_differences() {
    let mut r = rng(9);
    for _ in 0..5 {
        for (name, spec) in all_variants(&mut r) {
            let hyper = HyperVector::flatten(&spec, 1.0, FrequencyTransform::Unconstrained).unwrap();
            let (x, x2) = if name == "ar1" {
                (vec![r.random_range(0..6) as f64], vec![0.0])
            } else {
                (vec![r.random_range(-3.0..3.0)], vec![r.random_range(-3.0..3.0)])
            };
            let analytic = kernel_gradient(&spec, &x, &x2).unwrap();
            let f = |u: &[f64]| eval_kernel(&hyper.decode(u).unwrap().0, &x, &x2).unwrap();
            let fd: Vec<f64> = (0..analytic.len())
                .map(|i| central_difference(&f, &hyper.values, i, 1e-4))
                .collect();
            let err = relative_error(&analytic, &fd);
            assert!(err < TOL, "{name}: {err:e} {analytic:?} {fd:?}");
        }
    }
}

#[test]
fn multidimensional_sm_gradient() {
    let mut r = rng(10);
    let spec = KernelSpec::sm(random_sm(&mut r, 2, 2));
    let rows: Vec<Vec<f64>> = (0..25).map(|_| vec![r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)]).collect();
    let ys = rows.iter().map(|p| (p[0] - p[1]).cos()).collect();
    let data = Dataset::new(smgp::Inputs::from_rows(&rows).unwrap(), ys).unwrap();
    let hyper = HyperVector::flatten(&spec, 0.1, FrequencyTransform::Unconstrained).unwrap();
    check_lml_gradient("sm 2-d", &hyper, &data, &GpOptions::default());
}
