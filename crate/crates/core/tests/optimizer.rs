mod common;

use smgp::experiments::generate_from_kernel;
use smgp::gp::{log_marginal_likelihood, GpOptions};
use smgp::kernel::KernelSpec;
use smgp::optim::{init_baseline, init_sm_random, train, Baseline, OptimConfig, Template};
use smgp::{Dataset, Inputs};

fn se_data() -> Dataset {
    let x = Inputs::from_1d(&(0..200).map(|i| i as f64 * 0.5).collect::<Vec<_>>());
    generate_from_kernel(&KernelSpec::scaled(4.0, KernelSpec::se(5.0)), &x, 0.1, 17).unwrap()
}

#[test]
fn recovers_se_lengthscale() {
    let data = se_data();
    let cfg = OptimConfig {
        seed: 4,
        ..OptimConfig::default()
    };
    let (post, result) = train(&Template::Baseline(Baseline::SquaredExponential), &data, &cfg, &GpOptions::default()).unwrap();
    let KernelSpec::Scaled { inner, .. } = post.spec() else {
        panic!("unexpected {:?}", post.spec())
    };
    let KernelSpec::SquaredExponential { lengthscale } = **inner else {
        panic!("unexpected {inner:?}")
    };
    assert!((3.5..=7.0).contains(&lengthscale), "ℓ = {lengthscale}");
    for r in &result.restarts {
        assert!(result.best_log_marginal_likelihood >= r.initial_log_marginal_likelihood);
    }
    let (spec, noise) = result.best.unflatten().unwrap();
    let again = log_marginal_likelihood(&spec, noise, &data, &GpOptions::default()).unwrap();
    assert!((again - result.best_log_marginal_likelihood).abs() < 1e-8);
}

#[test]
fn more_restarts_never_hurt() {
    let x = Inputs::from_1d(&(1..=60).map(f64::from).collect::<Vec<_>>());
    let y: Vec<f64> = (1..=60).map(|t| (t as f64 * std::f64::consts::PI / 6.0).sin() + 0.01 * t as f64).collect();
    let data = Dataset::new(x, y).unwrap();
    let base = OptimConfig {
        seed: 2,
        max_iterations: 200,
        ..OptimConfig::default()
    };
    let t = Template::SpectralMixture { components: 2 };
    let one = train(&t, &data, &OptimConfig { restarts: Some(1), ..base.clone() }, &GpOptions::default()).unwrap().1;
    let five = train(&t, &data, &OptimConfig { restarts: Some(5), ..base }, &GpOptions::default()).unwrap().1;
    assert!(five.best_log_marginal_likelihood >= one.best_log_marginal_likelihood);
    assert_eq!(one.restarts[0], five.restarts[0]);
}

#[test]
fn initialization_rules() {
    let xs: Vec<f64> = (0..=100).filter(|i| *i != 50).map(f64::from).collect();
    let y: Vec<f64> = (0..xs.len()).map(|i| if i % 2 == 0 { 3.0 } else { -3.0 }).collect();
    let x = Inputs::from_1d(&xs);
    let data = Dataset::new(x, y).unwrap();
    let se = init_baseline(Baseline::SquaredExponential, &data).unwrap();
    assert_eq!(se, KernelSpec::scaled(9.0, KernelSpec::se(10.0)));
    let monthly = Dataset::new(
        Inputs::from_1d(&(1..=50).map(f64::from).collect::<Vec<_>>()),
        (0..50).map(|i| (i as f64).sin()).collect(),
    )
    .unwrap();
    for seed in 0..50 {
        let p = init_sm_random(10, &monthly, seed, None).unwrap();
        assert!(p.means.iter().flatten().all(|m| (0.0..=0.5).contains(m)));
        assert_eq!(p, init_sm_random(10, &monthly, seed, None).unwrap());
    }
    let single = Dataset::new(Inputs::from_1d(&[1.0]), vec![2.0]).unwrap();
    assert!(init_sm_random(2, &single, 0, None).is_err());
}

#[test]
fn weight_totals_track_target_variance() {
    let x = Inputs::from_1d(&(0..40).map(f64::from).collect::<Vec<_>>());
    let y: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 2.0 } else { -2.0 }).collect();
    let data = Dataset::new(x, y).unwrap();
    let mut totals: Vec<f64> = (0..1000).map(|s| init_sm_random(5, &data, s, None).unwrap().total_weight()).collect();
    totals.sort_by(f64::total_cmp);
    assert!(totals.iter().all(|t| (2.0..=8.0).contains(t)));
    assert!((totals[500] - 4.0).abs() < 0.5);
}
