//! Statistical checks of the field simulator and the thinning sampler.

use coxgp::geometry::{build_quadrature, Window};
use coxgp::random_field::{gaussianize, sample_se_field, FieldSampler, Preprocess, SquaredExpSampler};
use coxgp::rng::{child_seed, seed_rng};
use coxgp::simulate::simulate_cox;
use coxgp::stats::{ks_statistic, mean, variance};
use coxgp::truth::TruthSpec;

#[test]
fn gaussianized_marginal_is_uniform() {
    // repeated draws at one grid node: KS against U[0,1] at the 1% level
    let window = Window::centered_unit_square();
    let sampler = SquaredExpSampler::new(&window, 21, 0.005).unwrap();
    let mut rng = seed_rng(3);
    let m = 10_000;
    let node = 5 * 21 + 13;
    let draws: Vec<f64> = (0..m)
        .map(|_| gaussianize(&sampler.sample_raw(&mut rng)).unwrap()[node])
        .collect();
    let d = ks_statistic(&draws, |x| x.clamp(0.0, 1.0));
    let critical = 1.63 / (m as f64).sqrt();
    assert!(d < critical, "KS = {d}, critical = {critical}");
}

#[test]
fn gaussianized_values_stay_in_open_unit_interval() {
    let window = Window::new(vec![0.0], vec![1.0]).unwrap();
    let sampler = SquaredExpSampler::new(&window, 101, 0.005).unwrap();
    let mut rng = seed_rng(9);
    let mut checked = 0usize;
    while checked < 1_000_000 {
        let vals = gaussianize(&sampler.sample_raw(&mut rng)).unwrap();
        assert!(vals.iter().all(|&v| v > 0.0 && v < 1.0));
        checked += vals.len();
    }
}

#[test]
fn thinning_calibration_skew_normal_truth() {
    // fresh covariate draws per replicate: mean count close to the
    // integral of the truth (about 4.96)
    let window = Window::centered_unit_square();
    let sampler = FieldSampler::new(window, 101, &[0.005], Preprocess::NormalCdf).unwrap();
    let truth = TruthSpec::SkewNormal1d;
    let upper = truth.rho_upper();
    let m = 2_000;
    let counts: Vec<f64> = (0..m)
        .map(|i| {
            let mut rng = seed_rng(child_seed(1234, i as u64));
            let field = sampler.sample(&mut rng).unwrap();
            simulate_cox(&field, |z| truth.eval(z).unwrap(), upper, &mut rng)
                .unwrap()
                .len() as f64
        })
        .collect();
    let m_count = mean(&counts);
    let se = (variance(&counts) / m as f64).sqrt();
    assert!(
        (m_count - 5.0).abs() < 0.3,
        "mean count {m_count} (se {se})"
    );
}

#[test]
fn quadrature_covariate_read_is_unbiased_at_default_resolution() {
    // at the default 101-per-axis field grid, the quadrature read of the
    // covariates carries negligible interpolation bias: the mean integrated
    // intensity matches the exact uniform-marginal value 4.9605
    let window = Window::centered_unit_square();
    let truth = TruthSpec::SkewNormal1d;
    let quad = build_quadrature(&window, 50).unwrap();
    let sampler = FieldSampler::new(window, 101, &[0.005], Preprocess::NormalCdf).unwrap();
    let m = 200;
    let mut acc = 0.0;
    for i in 0..m {
        let field = sampler.sample(&mut seed_rng(child_seed(9, i))).unwrap();
        acc += quad
            .integrate(|x| truth.eval(&field.evaluate(x).unwrap()).unwrap())
            .unwrap();
    }
    let mean_intensity = acc / m as f64;
    assert!(
        (mean_intensity - 4.9605).abs() < 0.15,
        "mean integrated intensity {mean_intensity}"
    );
}

#[test]
fn raw_field_is_deterministic_and_unit_variance() {
    let window = Window::centered_unit_square();
    let a = sample_se_field(&window, 31, 0.05, 5).unwrap();
    let b = sample_se_field(&window, 31, 0.05, 5).unwrap();
    assert_eq!(a, b);
    // pooled variance over nodes and draws approaches one
    let sampler = SquaredExpSampler::new(&window, 31, 0.05).unwrap();
    let mut rng = seed_rng(6);
    let mut all = Vec::new();
    for _ in 0..200 {
        all.extend(sampler.sample_raw(&mut rng));
    }
    let v = variance(&all);
    assert!((v - 1.0).abs() < 0.05, "pooled variance {v}");
}

#[test]
fn large_dataset_total_count_is_poisson_superposed() {
    // n = 1000 replicates of the skew-normal scenario: total points close
    // to 1000 times the per-replicate mean (about 4960), within 3 sd of a
    // Poisson total
    let window = Window::centered_unit_square();
    let sampler = FieldSampler::new(window, 101, &[0.005], Preprocess::NormalCdf).unwrap();
    let truth = TruthSpec::SkewNormal1d;
    let ds = coxgp::simulate::simulate_dataset(
        1000,
        &sampler,
        |z| truth.eval(z).unwrap(),
        truth.rho_upper(),
        71,
    )
    .unwrap();
    let total = ds.total_events() as f64;
    let expected = 4960.5;
    assert!(
        (total - expected).abs() < 3.0 * expected.sqrt() + 100.0,
        "total {total}"
    );
}
