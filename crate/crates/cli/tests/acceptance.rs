//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them).
//!
//! Criteria 6 and 7 are long-running and marked #[ignore]; run the slow
//! suite with `cargo test -p coxgp-cli --test acceptance -- --ignored`.

use std::path::Path;

use coxgp::geometry::{build_basis, build_quadrature, BasisConfig, Window};
use coxgp::likelihood::LikelihoodContext;
use coxgp::model::{sigmoid, HyperParams, LatentState, NodeDistances};
use coxgp::random_field::{FieldSampler, Preprocess};
use coxgp::rng::seed_rng;
use coxgp::sampler::{run_chain, theta_log_target, Chain, SamplerConfig};
use coxgp::simulate::{simulate_cox, simulate_dataset, Dataset, PointPattern};
use coxgp::special::gamma_cdf;
use coxgp::stats::{ks_statistic, mean, variance, GridCdf};
use coxgp::summaries::{dz_distance, l2_norm_of_truth, DzMode, ZGrid};
use coxgp::truth::TruthSpec;

use coxgp_cli::config::ExperimentConfig;
use coxgp_cli::experiment::run_experiment;

fn small_dataset(n: usize, rate: f64, seed: u64) -> Dataset {
    let sampler = FieldSampler::new(
        Window::centered_unit_square(),
        11,
        &[0.005],
        Preprocess::NormalCdf,
    )
    .unwrap();
    simulate_dataset(n, &sampler, |_| rate, rate, seed).unwrap()
}

/// Criterion 1: conjugate-block exactness. 1e5 gibbs_rho_star draws at
/// frozen conditionals pass a KS test at the 1% level against the
/// closed-form Gamma update.
#[test]
fn c1_conjugate_block_exactness() {
    let start = std::time::Instant::now();
    let ds = small_dataset(3, 6.0, 101);
    let basis = build_basis(1, BasisConfig::Linear1d { nodes: 8 }).unwrap();
    let quad = build_quadrature(ds.window(), 12).unwrap();
    let ctx = LikelihoodContext::new(&ds, &quad, &basis).unwrap();
    let dists = NodeDistances::from_basis(&basis);
    let cfg = SamplerConfig {
        iterations: 10,
        burn_in: 1,
        seed: 11,
        ..SamplerConfig::default()
    };
    let mut chain = Chain::new(&ctx, &dists, HyperParams::default(), &cfg).unwrap();
    let shape = 1.0 + ctx.total_events() as f64;
    let rate = 2.0 + chain.sigma_integral();
    let m = 100_000;
    let draws: Vec<f64> = (0..m)
        .map(|_| {
            chain.gibbs_rho_star();
            chain.state.rho_star
        })
        .collect();
    let d = ks_statistic(&draws, |x| gamma_cdf(shape, rate, x));
    let critical = 1.63 / (m as f64).sqrt();
    let elapsed = start.elapsed();
    assert!(d < critical, "KS = {d:.5} >= {critical:.5}");
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}");
    println!(
        "criterion 1: PASS — gibbs rho* KS {d:.5} < {critical:.5} vs Gamma({shape}, {rate:.4}) in {elapsed:.2?}"
    );
}

/// Criterion 2: pCN prior invariance under a flat likelihood for
/// zeta in {0.05, 0.25, 0.49}.
#[test]
fn c2_pcn_prior_invariance() {
    let start = std::time::Instant::now();
    let window = Window::centered_unit_square();
    let sampler = FieldSampler::new(window.clone(), 11, &[0.005], Preprocess::NormalCdf).unwrap();
    let field = sampler.sample(&mut seed_rng(7)).unwrap();
    let pattern = PointPattern::new(window, vec![]).unwrap();
    let ds = Dataset::new(vec![(pattern, field)]).unwrap();
    let basis = build_basis(1, BasisConfig::Linear1d { nodes: 8 }).unwrap();
    let quad = build_quadrature(ds.window(), 4).unwrap();
    let ctx = LikelihoodContext::new(&ds, &quad, &basis).unwrap();
    let dists = NodeDistances::from_basis(&basis);
    let sweeps = 100_000;
    for (zi, &zeta) in [0.05, 0.25, 0.49].iter().enumerate() {
        let cfg = SamplerConfig {
            iterations: 10,
            burn_in: 1,
            seed: 21 + zi as u64,
            zeta,
            ..SamplerConfig::default()
        };
        let mut chain = Chain::new(&ctx, &dists, HyperParams::default(), &cfg).unwrap();
        chain.state.rho_star = 0.0; // likelihood ratio identically 1
        let v = basis.len();
        let mut sums = vec![0.0; v];
        let mut sq = vec![0.0; v];
        for _ in 0..sweeps {
            let accepted = chain.pcn_w();
            assert!(accepted);
            for (k, w) in chain.state.w.iter().enumerate() {
                sums[k] += w;
                sq[k] += w * w;
            }
        }
        let a = (1.0f64 - 2.0 * zeta).sqrt();
        let se_mean = ((1.0 + a) / (1.0 - a) / sweeps as f64).sqrt();
        for k in 0..v {
            let m = sums[k] / sweeps as f64;
            let var = sq[k] / sweeps as f64 - m * m;
            assert!(
                m.abs() < 3.0 * se_mean,
                "zeta {zeta}: node {k} mean {m:.4} vs 3 SE {:.4}",
                3.0 * se_mean
            );
            assert!(
                (var - 1.0).abs() < 0.05,
                "zeta {zeta}: node {k} variance {var:.4}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}");
    println!(
        "criterion 2: PASS — pCN prior invariance at zeta 0.05/0.25/0.49 over {sweeps} sweeps in {elapsed:.2?}"
    );
}

/// 3x3 inverse and determinant by cofactors (oracle-side linear algebra).
fn inv3(m: [[f64; 3]; 3]) -> ([[f64; 3]; 3], f64) {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let cof =
        |r1: usize, r2: usize, c1: usize, c2: usize| m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = cof(1, 2, 1, 2) / det;
    inv[0][1] = -cof(0, 2, 1, 2) / det;
    inv[0][2] = cof(0, 1, 1, 2) / det;
    inv[1][0] = inv[0][1];
    inv[1][1] = cof(0, 2, 0, 2) / det;
    inv[1][2] = -cof(0, 1, 0, 2) / det;
    inv[2][0] = inv[0][2];
    inv[2][1] = inv[1][2];
    inv[2][2] = cof(0, 1, 0, 1) / det;
    (inv, det)
}

/// Criterion 3: long-run empirical CDFs of the theta and ell blocks match
/// the numerically normalized 1-D full conditionals.
#[test]
fn c3_one_dimensional_target_matching() {
    let start = std::time::Instant::now();
    let hyper = HyperParams::default();
    let ds = small_dataset(2, 4.0, 103);
    let quad = build_quadrature(ds.window(), 8).unwrap();

    // theta block: d = 1, ell fixed at 2.0
    let basis4 = build_basis(1, BasisConfig::Linear1d { nodes: 4 }).unwrap();
    let ctx4 = LikelihoodContext::new(&ds, &quad, &basis4).unwrap();
    let dists4 = NodeDistances::from_basis(&basis4);
    let cfg = SamplerConfig {
        iterations: 10,
        burn_in: 1,
        seed: 31,
        ..SamplerConfig::default()
    };
    let mut chain = Chain::new(&ctx4, &dists4, hyper, &cfg).unwrap();
    chain.state.ell[0] = 2.0;
    let m = 200_000;
    let mut draws = Vec::with_capacity(m);
    for _ in 0..m {
        chain.mh_theta(0);
        draws.push(chain.state.theta[0]);
    }
    let grid: Vec<f64> = (0..10_000)
        .map(|i| 1e-6 + (1.0 - 2e-6) * i as f64 / 9_999.0)
        .collect();
    let dens: Vec<f64> = grid
        .iter()
        .map(|&t| theta_log_target(2.0, t, &hyper, 1).exp())
        .collect();
    let cdf = GridCdf::from_unnormalized_density(&grid, &dens);
    let d_theta = ks_statistic(&draws, |x| cdf.eval(x));
    assert!(d_theta < 0.01, "theta KS = {d_theta:.5}");

    // ell block: V = 3, w frozen
    let basis3 = build_basis(1, BasisConfig::Linear1d { nodes: 3 }).unwrap();
    let ctx3 = LikelihoodContext::new(&ds, &quad, &basis3).unwrap();
    let dists3 = NodeDistances::from_basis(&basis3);
    let cfg = SamplerConfig {
        iterations: 10,
        burn_in: 1,
        seed: 33,
        ..SamplerConfig::default()
    };
    let w = [1.2, -0.4, 0.8];
    let theta = 0.5;
    let mut chain = Chain::new(&ctx3, &dists3, hyper, &cfg).unwrap();
    chain.set_w(w.to_vec());
    chain.state.theta[0] = theta;
    for _ in 0..20_000 {
        chain.arwm_ell(0);
    }
    chain.freeze_adaptation();
    let mut draws = Vec::with_capacity(m);
    for _ in 0..m {
        chain.arwm_ell(0);
        draws.push(chain.state.ell[0]);
    }
    let nodes = [0.0, 0.5, 1.0];
    let target = |ell: f64| -> f64 {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let d = nodes[i] - nodes[j];
                c[i][j] = (-ell * d * d).exp();
            }
        }
        let (inv, det) = inv3(c);
        let mut quad_form = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad_form += w[i] * inv[i][j] * w[j];
            }
        }
        (-0.5 * det.ln() - 0.5 * quad_form + (hyper.a_gamma / theta - 1.0) * ell.ln()
            - hyper.b_gamma * ell.powf(1.0 / theta))
        .exp()
    };
    let grid: Vec<f64> = (0..12_000)
        .map(|i| 1e-4 + 6.0 * i as f64 / 11_999.0)
        .collect();
    let dens: Vec<f64> = grid.iter().map(|&l| target(l)).collect();
    let cdf = GridCdf::from_unnormalized_density(&grid, &dens);
    let d_ell = ks_statistic(&draws, |x| cdf.eval(x));
    assert!(d_ell < 0.015, "ell KS = {d_ell:.5}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "criterion 3: PASS — theta KS {d_theta:.5} < 0.01, ell KS {d_ell:.5} < 0.015 over {m} draws in {elapsed:.2?}"
    );
}

/// Criterion 4: thinning calibration. Mean count for the skew-normal truth
/// with fresh covariates is 5 +/- 0.3 over 1e4 replicates, and constant
/// intensities pass a Poisson dispersion check within 10%.
#[test]
fn c4_thinning_calibration() {
    let start = std::time::Instant::now();
    let window = Window::centered_unit_square();
    let sampler = FieldSampler::new(window.clone(), 101, &[0.005], Preprocess::NormalCdf).unwrap();
    let truth = TruthSpec::SkewNormal1d;
    let upper = truth.rho_upper();
    let m = 10_000;
    let mut rng = seed_rng(41);
    let counts: Vec<f64> = (0..m)
        .map(|_| {
            let field = sampler.sample(&mut rng).unwrap();
            simulate_cox(&field, |z| truth.eval(z).unwrap(), upper, &mut rng)
                .unwrap()
                .len() as f64
        })
        .collect();
    let mean_count = mean(&counts);
    assert!(
        (mean_count - 5.0).abs() < 0.3,
        "mean count {mean_count:.4}"
    );

    // dispersion for constant intensity
    let field = sampler.sample(&mut rng).unwrap();
    let c = 6.0;
    let const_counts: Vec<f64> = (0..m)
        .map(|_| simulate_cox(&field, |_| c, c, &mut rng).unwrap().len() as f64)
        .collect();
    let ratio = variance(&const_counts) / mean(&const_counts);
    assert!((ratio - 1.0).abs() < 0.1, "dispersion ratio {ratio:.4}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!(
        "criterion 4: PASS — mean count {mean_count:.3} (target 5 +/- 0.3), dispersion ratio {ratio:.3} in {elapsed:.2?}"
    );
}

fn desk_1d_config(n: Vec<usize>, replications: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset("desk_1d").unwrap();
    cfg.n = n;
    cfg.replications = replications;
    cfg.seed = seed;
    cfg
}

/// Criterion 5: desk-scale slice of the 1-D error table. Mean relative L2
/// errors within 3 paper standard deviations of the reported values for
/// both the posterior mean and the kernel baseline.
#[test]
fn c5_desk_scale_error_table() {
    let start = std::time::Instant::now();
    let cfg = desk_1d_config(vec![50, 250], 5, 1);
    let dir = tempdir("c5");
    let report = run_experiment(&cfg, &dir).unwrap();
    assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
    let get = |estimator: &str, n: usize| -> f64 {
        report
            .rows
            .iter()
            .find(|r| r.estimator == estimator && r.metric == "relative_l2" && r.n == n)
            .unwrap()
            .mean
    };
    let post50 = get("posterior_mean", 50);
    let post250 = get("posterior_mean", 250);
    let kern50 = get("kernel_average", 50);
    let kern250 = get("kernel_average", 250);
    assert!(
        (post50 - 0.19).abs() <= 3.0 * 0.05,
        "posterior n=50 relative error {post50:.4} outside 0.19 +/- 0.15"
    );
    assert!(
        (post250 - 0.09).abs() <= 3.0 * 0.01,
        "posterior n=250 relative error {post250:.4} outside 0.09 +/- 0.03"
    );
    assert!(
        (kern50 - 0.18).abs() <= 3.0 * 0.05,
        "kernel n=50 relative error {kern50:.4} outside 0.18 +/- 0.15"
    );
    assert!(
        (kern250 - 0.15).abs() <= 3.0 * 0.019,
        "kernel n=250 relative error {kern250:.4} outside 0.15 +/- 0.057"
    );
    // pCN acceptance band for the n=50 chains after tuning
    let acc50 = report
        .rows
        .iter()
        .find(|r| r.estimator == "sampler" && r.metric == "pcn_acceptance" && r.n == 50)
        .unwrap()
        .mean;
    assert!(
        (0.15..=0.45).contains(&acc50),
        "pCN acceptance {acc50:.3} outside [0.15, 0.45]"
    );
    let coverage250 = report
        .rows
        .iter()
        .find(|r| r.metric == "band_coverage" && r.n == 250)
        .unwrap()
        .mean;
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 45 * 60, "took {elapsed:?}");
    println!(
        "criterion 5: PASS — posterior rel L2 {post50:.3}/{post250:.3} (targets 0.19/0.09), \
         kernel {kern50:.3}/{kern250:.3} (targets 0.18/0.15), pCN accept {acc50:.3}, \
         band coverage {coverage250:.3} in {elapsed:.2?}"
    );
}

/// Coverage smoke (slow suite): at the full-size sampler settings (V = 200,
/// 20000 sweeps, 5000 burn-in) the truth lies inside the pointwise 95%
/// band at >= 80% of grid points for n = 250. The reduced desk-scale runs
/// of criterion 5 under-disperse their bands (about 0.6 coverage) because
/// 3500 post-burn-in sweeps hold only a handful of effective samples.
#[test]
#[ignore = "slow suite: about 15 minutes"]
fn coverage_smoke_full_scale() {
    let start = std::time::Instant::now();
    let mut cfg = ExperimentConfig::preset("paper_1d").unwrap();
    cfg.n = vec![250];
    cfg.replications = 3;
    cfg.baseline = false;
    cfg.seed = 5;
    let dir = tempdir("coverage");
    let report = run_experiment(&cfg, &dir).unwrap();
    assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
    let coverage = report
        .rows
        .iter()
        .find(|r| r.metric == "band_coverage" && r.n == 250)
        .unwrap()
        .mean;
    assert!(coverage >= 0.8, "band coverage {coverage:.3} < 0.8");
    let elapsed = start.elapsed();
    println!("coverage smoke: PASS — mean band coverage {coverage:.3} >= 0.8 in {elapsed:.2?}");
}

/// Criterion 6 (slow suite): contraction trend. Mean relative error
/// strictly decreases across n in {50, 250, 1000}.
#[test]
#[ignore = "slow suite: about 20 minutes"]
fn c6_contraction_trend() {
    let start = std::time::Instant::now();
    let mut cfg = desk_1d_config(vec![50, 250], 5, 1);
    let dir = tempdir("c6");
    let report_small = run_experiment(&cfg, &dir).unwrap();
    cfg.n = vec![1000];
    cfg.replications = 3;
    let report_large = run_experiment(&cfg, &tempdir("c6_large")).unwrap();
    let get = |rep: &coxgp_cli::experiment::ExperimentReport, n: usize| -> f64 {
        rep.rows
            .iter()
            .find(|r| r.estimator == "posterior_mean" && r.metric == "relative_l2" && r.n == n)
            .unwrap()
            .mean
    };
    let e50 = get(&report_small, 50);
    let e250 = get(&report_small, 250);
    let e1000 = get(&report_large, 1000);
    assert!(
        e50 > e250 && e250 > e1000,
        "errors not strictly decreasing: {e50:.4}, {e250:.4}, {e1000:.4}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 2 * 3600, "took {elapsed:?}");
    println!(
        "criterion 6: PASS — relative errors {e50:.3} > {e250:.3} > {e1000:.3} across n = 50/250/1000 in {elapsed:.2?}"
    );
}

/// Criterion 7 (slow suite): anisotropy adaptation in the 2-D experiment;
/// posterior-mean length-scale ratio ell_1/ell_2 >= 3.
#[test]
#[ignore = "slow suite: about 30 minutes"]
fn c7_anisotropy_adaptation() {
    let start = std::time::Instant::now();
    let mut cfg = ExperimentConfig::preset("desk_2d_aniso").unwrap();
    cfg.seed = 2;
    let dir = tempdir("c7");
    let report = run_experiment(&cfg, &dir).unwrap();
    assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
    let ratio = report
        .rows
        .iter()
        .find(|r| r.metric == "ell_ratio")
        .unwrap()
        .mean;
    assert!(ratio >= 3.0, "posterior-mean length-scale ratio {ratio:.3} < 3");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 3600, "took {elapsed:?}");
    println!("criterion 7: PASS — ell_1/ell_2 posterior-mean ratio {ratio:.2} >= 3 in {elapsed:.2?}");
}

/// Dense 5-D grid quadrature of the toy posterior (n = 1, V = 2): returns
/// E[rho(z) | data] at the requested covariate points.
fn brute_force_toy_posterior(
    ctx: &LikelihoodContext,
    hyper: &HyperParams,
    zs: &[f64],
) -> Vec<f64> {
    // grids over (rho*, theta, ell, w1, w2)
    let n_rho = 96;
    let rho_hi = 16.0;
    let n_theta = 24;
    let n_ell = 48;
    let ell_hi = 10.0;
    let n_w = 64;
    let w_hi = 6.0;

    let rho_grid: Vec<f64> = (0..n_rho)
        .map(|i| (i as f64 + 0.5) / n_rho as f64 * rho_hi)
        .collect();
    let theta_grid: Vec<f64> = (0..n_theta)
        .map(|i| (i as f64 + 0.5) / n_theta as f64)
        .collect();
    let ell_grid: Vec<f64> = (0..n_ell)
        .map(|i| (i as f64 + 0.5) / n_ell as f64 * ell_hi)
        .collect();
    let w_grid: Vec<f64> = (0..n_w)
        .map(|i| -w_hi + (i as f64 + 0.5) / n_w as f64 * 2.0 * w_hi)
        .collect();

    let k_events = ctx.total_events();
    assert_eq!(ctx.dim_z(), 1);

    // hat-function weights on the two basis nodes {0, 1}: w(z) = w1 (1-z) + w2 z
    let w_at = |w1: f64, w2: f64, z: f64| w1 * (1.0 - z) + w2 * z;

    // prior pieces
    let gamma_log_pdf = |x: f64, a: f64, b: f64| (a - 1.0) * x.ln() - b * x;
    let rho_log_prior = |r: f64| gamma_log_pdf(r, hyper.a_rho, hyper.b_rho);
    // induced density of ell given theta (gamma variable to the theta power),
    // including the 1/theta factor from the change of variables
    let ell_log_prior = |l: f64, t: f64| {
        (hyper.a_gamma / t - 1.0) * l.ln() - hyper.b_gamma * l.powf(1.0 / t) - t.ln()
    };
    let theta_log_prior =
        |t: f64| (hyper.a_theta - 1.0) * t.ln() + (hyper.b_theta - 1.0) * (1.0 - t).ln();

    let mut numer = vec![0.0f64; zs.len()];
    let mut denom = 0.0f64;
    // shift all log weights by a fixed constant for stability
    let log_shift = k_events as f64 * 4.0f64.ln();

    for &ell in &ell_grid {
        let c_off = (-ell).exp(); // nodes at distance 1
        let det = 1.0 - c_off * c_off;
        let log_det = det.ln();
        // theta integral factor for this ell
        let mut theta_mass = 0.0;
        for &t in &theta_grid {
            theta_mass += (theta_log_prior(t) + ell_log_prior(ell, t)).exp();
        }
        for &w1 in &w_grid {
            for &w2 in &w_grid {
                let quad_form = (w1 * w1 + w2 * w2 - 2.0 * c_off * w1 * w2) / det;
                let log_gauss = -0.5 * log_det - 0.5 * quad_form;
                // likelihood pieces independent of rho*
                let mut event_logsig = 0.0;
                for k in 0..k_events {
                    let z = ctx.event_covariate(k)[0];
                    event_logsig += sigmoid(w_at(w1, w2, z)).ln();
                }
                let mut integral = 0.0;
                for i in 0..ctx.replicates() {
                    for (qi, wt) in ctx.quad_weights().iter().enumerate() {
                        let z = ctx.node_covariate(i, qi)[0];
                        integral += wt * sigmoid(w_at(w1, w2, z));
                    }
                }
                for &rho in &rho_grid {
                    let loglik =
                        k_events as f64 * rho.ln() + event_logsig - rho * integral;
                    let log_weight =
                        rho_log_prior(rho) + log_gauss + loglik - log_shift;
                    let weight = log_weight.exp() * theta_mass;
                    denom += weight;
                    for (zi, &z) in zs.iter().enumerate() {
                        numer[zi] += weight * rho * sigmoid(w_at(w1, w2, z));
                    }
                }
            }
        }
    }
    numer.iter().map(|v| v / denom).collect()
}

/// Criterion 8: oracle equivalences.
#[test]
fn c8_oracle_equivalences() {
    let start = std::time::Instant::now();
    let hyper = HyperParams::default();

    // (a) log-likelihood against a term-by-term oracle without precomputation
    let sampler = FieldSampler::new(
        Window::centered_unit_square(),
        11,
        &[0.005],
        Preprocess::NormalCdf,
    )
    .unwrap();
    let ds = simulate_dataset(2, &sampler, |_| 3.0, 3.0, 81).unwrap();
    let basis5 = build_basis(1, BasisConfig::Linear1d { nodes: 5 }).unwrap();
    let quad = build_quadrature(ds.window(), 15).unwrap();
    let ctx = LikelihoodContext::new(&ds, &quad, &basis5).unwrap();
    let dists5 = NodeDistances::from_basis(&basis5);
    let mut rng = seed_rng(82);
    let mut max_loglik_err = 0.0f64;
    for _ in 0..5 {
        let state = coxgp::model::sample_prior(&hyper, &dists5, &mut rng).unwrap();
        let mut oracle = 0.0;
        for (pattern, field) in ds.pairs() {
            for x in pattern.points() {
                let z = field.evaluate(x).unwrap();
                oracle += state.intensity_at(&basis5, &z).unwrap().ln();
            }
            oracle -= quad
                .integrate(|x| {
                    let z = field.evaluate(x).unwrap();
                    state.intensity_at(&basis5, &z).unwrap() - 1.0
                })
                .unwrap();
        }
        max_loglik_err = max_loglik_err.max((ctx.log_likelihood(&state) - oracle).abs());
    }
    assert!(max_loglik_err < 1e-10, "loglik oracle error {max_loglik_err:.2e}");

    // (b) log_prior_w against a dense-inverse oracle on random V <= 8 problems
    let mut max_prior_err = 0.0f64;
    for v in 4..=8usize {
        let basis = build_basis(1, BasisConfig::Linear1d { nodes: v }).unwrap();
        let dists = NodeDistances::from_basis(&basis);
        use rand::Rng;
        let ell = [rng.gen_range(0.5..20.0)];
        let w: Vec<f64> = (0..v).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let state = LatentState::new(1.0, vec![0.5], ell.to_vec(), w.clone(), &dists).unwrap();
        let c = dists.covariance(&ell);
        let inv = c.clone().try_inverse().unwrap();
        let wv = nalgebra::DVector::from_column_slice(&w);
        let oracle = -0.5 * (wv.transpose() * inv * &wv)[(0, 0)] - 0.5 * c.determinant().ln();
        max_prior_err = max_prior_err.max((state.log_prior_w() - oracle).abs());
    }
    assert!(max_prior_err < 1e-8, "log_prior_w oracle error {max_prior_err:.2e}");

    // (c) toy joint posterior against the dense 5-D grid
    let toy_sampler = FieldSampler::new(
        Window::centered_unit_square(),
        21,
        &[0.005],
        Preprocess::NormalCdf,
    )
    .unwrap();
    // first seed from 301 whose single replicate has one or two events
    let toy = (301u64..)
        .map(|s| simulate_dataset(1, &toy_sampler, |_| 2.0, 2.0, s).unwrap())
        .find(|d| (1..=2).contains(&d.total_events()))
        .unwrap();
    let basis2 = build_basis(1, BasisConfig::Linear1d { nodes: 2 }).unwrap();
    let toy_quad = build_quadrature(toy.window(), 10).unwrap();
    let toy_ctx = LikelihoodContext::new(&toy, &toy_quad, &basis2).unwrap();
    let zs = [0.2, 0.5, 0.8];
    let brute = brute_force_toy_posterior(&toy_ctx, &hyper, &zs);
    let cfg = SamplerConfig {
        iterations: 400_000,
        burn_in: 40_000,
        thin: 20,
        seed: 83,
        zeta: 0.25,
        tune_zeta: false,
        ..SamplerConfig::default()
    };
    let trace = run_chain(&toy_ctx, &basis2, &hyper, &cfg).unwrap();
    let snaps: Vec<_> = trace.snapshots.iter().filter(|s| s.sweep > cfg.burn_in).collect();
    let mut mcmc = vec![0.0; zs.len()];
    for snap in &snaps {
        for (zi, &z) in zs.iter().enumerate() {
            mcmc[zi] += snap.rho_star * sigmoid(basis2.evaluate(&snap.w, &[z]).unwrap());
        }
    }
    for v in mcmc.iter_mut() {
        *v /= snaps.len() as f64;
    }
    let mut max_toy_rel = 0.0f64;
    for zi in 0..zs.len() {
        let rel = (mcmc[zi] - brute[zi]).abs() / brute[zi];
        max_toy_rel = max_toy_rel.max(rel);
    }
    assert!(
        max_toy_rel < 0.10,
        "toy joint posterior mismatch {max_toy_rel:.4} (mcmc {mcmc:?} vs grid {brute:?})"
    );

    // (d) d_Z empirical mode against the uniform-mode identity; the spatial
    // integral is evaluated at the field's own grid nodes, where the
    // stationary marginal is exactly uniform
    let window = Window::centered_unit_square();
    let field_sampler =
        FieldSampler::new(window.clone(), 51, &[0.005], Preprocess::NormalCdf).unwrap();
    let mut rng2 = seed_rng(84);
    let fields: Vec<_> = (0..500)
        .map(|_| field_sampler.sample(&mut rng2).unwrap())
        .collect();
    let grid_len = fields[0].grid_len();
    let node_coords: Vec<f64> = (0..grid_len)
        .flat_map(|k| fields[0].node_coords(k))
        .collect();
    let dz_quad = coxgp::geometry::QuadratureRule::from_parts(
        window.dim(),
        node_coords,
        vec![window.volume() / grid_len as f64; grid_len],
    )
    .unwrap();
    let t1 = TruthSpec::SkewNormal1d;
    let rho1 = |z: &[f64]| t1.eval(z).unwrap();
    let rho2 = |z: &[f64]| 2.0 + 3.0 * z[0];
    let fine = ZGrid::uniform(&[2000]).unwrap();
    let uniform = dz_distance(
        rho1,
        rho2,
        DzMode::Uniform {
            zgrid: &fine,
            window_volume: window.volume(),
        },
    )
    .unwrap();
    // per-field distances for a Monte Carlo standard error
    let per_field: Vec<f64> = fields
        .iter()
        .map(|f| {
            dz_distance(
                rho1,
                rho2,
                DzMode::Empirical {
                    fields: std::slice::from_ref(f),
                    quadrature: &dz_quad,
                },
            )
            .unwrap()
            .powi(2)
        })
        .collect();
    let emp2 = mean(&per_field);
    let se = (variance(&per_field) / per_field.len() as f64).sqrt();
    assert!(
        (emp2 - uniform * uniform).abs() < 3.0 * se,
        "d_Z^2 empirical {emp2:.5} vs uniform {:.5} (3 SE = {:.5})",
        uniform * uniform,
        3.0 * se
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "criterion 8 (oracles): PASS — loglik oracle {max_loglik_err:.1e}, log_prior_w oracle \
         {max_prior_err:.1e}, toy joint {max_toy_rel:.3} (tol 0.10), d_Z identity ok in {elapsed:.2?}"
    );
}

/// Criterion 8, truth-norm clause: recomputed L2 norms of the four
/// supplement ground truths against the values in the paper's table
/// captions, each within 1%.
///
/// The two 1-D values reproduce. The two 2-D values do not reproduce under
/// any reading of the printed formulas (the closest defensible conventions
/// land 1.9% and 5.5% away; the convention that exactly reproduces the
/// main-text 2-D table's norm gives 9.80 and 22.54 here), so this check
/// reports the discrepancy and fails honestly rather than loosening the
/// stated 1% tolerance.
#[test]
fn c8_truth_norm_cross_checks() {
    let grid1 = ZGrid::uniform(&[400]).unwrap();
    let grid2 = ZGrid::uniform(&[100, 100]).unwrap();
    let cases = [
        (TruthSpec::Plateau1d, &grid1, 2.29),
        (TruthSpec::ExpDecay1d, &grid1, 6.09),
        (TruthSpec::SkewBasin2d, &grid2, 9.62),
        (TruthSpec::SkewPeaks2d, &grid2, 21.36),
    ];
    let mut failures = Vec::new();
    let mut report = Vec::new();
    for (truth, grid, reported) in cases {
        let got = l2_norm_of_truth(&truth, grid).unwrap();
        let rel = (got - reported).abs() / reported;
        report.push(format!(
            "{}: {got:.4} vs {reported} ({:.2}%)",
            truth.name(),
            rel * 100.0
        ));
        if rel > 0.01 {
            failures.push(format!(
                "{} norm {got:.4} differs from reported {reported} by {:.2}%",
                truth.name(),
                rel * 100.0
            ));
        }
    }
    if failures.is_empty() {
        println!("criterion 8 (truth norms): PASS — [{}]", report.join("; "));
    } else {
        println!("criterion 8 (truth norms): FAIL — [{}]", report.join("; "));
    }
    assert!(
        failures.is_empty(),
        "truth-norm cross-checks outside 1%: {failures:?}"
    );
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("coxgp_acceptance_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Criterion 9: determinism. Equal seeds produce byte-identical traces and
/// summary CSVs across repeated runs and across thread counts 1 and 4.
#[test]
fn c9_determinism_across_runs_and_threads() {
    let start = std::time::Instant::now();
    let mut cfg = ExperimentConfig::preset("desk_1d").unwrap();
    cfg.n = vec![10];
    cfg.replications = 2;
    cfg.field.resolution = 31;
    cfg.basis = coxgp_cli::config::BasisConfigFile::Linear1d { nodes: 30 };
    cfg.sampler.iterations = 300;
    cfg.sampler.burn_in = 100;
    cfg.zgrid = vec![50];
    cfg.seed = 9;

    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for (i, threads) in [1usize, 1, 4, 4].iter().enumerate() {
        let dir = tempdir(&format!("c9_{i}"));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(*threads)
            .build()
            .unwrap();
        pool.install(|| run_experiment(&cfg, &dir).unwrap());
        let files = [
            "summary.csv",
            "n10/trace_0.csv",
            "n10/trace_1.csv",
            "n10/w_0.csv",
            "n10/estimate_0.csv",
            "n10/baseline_0.csv",
            "n10/spatial_0.csv",
            "n10/estimate_0.svg",
        ];
        outputs.push(files.iter().map(|f| read_bytes(&dir.join(f))).collect());
    }
    for run in 1..outputs.len() {
        for (f, bytes) in outputs[run].iter().enumerate() {
            assert_eq!(
                bytes, &outputs[0][f],
                "output file {f} differs between run 0 and run {run}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "criterion 9: PASS — byte-identical artifacts across 2 repeats x threads {{1,4}} in {elapsed:.2?}"
    );
}
