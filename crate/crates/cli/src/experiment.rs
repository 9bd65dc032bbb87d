//! Experiment orchestration: simulate (or load) datasets, fit chains,
//! compute baselines and error tables, and emit all artifacts.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use coxgp::geometry::{build_basis, build_quadrature, InterpolationBasis, QuadratureRule, Window};
use coxgp::kernel::{kernel_estimate_average, KernelVariant};
use coxgp::likelihood::LikelihoodContext;
use coxgp::random_field::FieldSampler;
use coxgp::rng::child_seed;
use coxgp::sampler::{run_chain, ChainTrace};
use coxgp::simulate::{simulate_dataset, Dataset};
use coxgp::summaries::{intensity_estimate, l2_error, plugin_spatial_intensity, ZGrid};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::{CliError, Result};
use crate::formats::{
    summarize, write_estimate_csv, write_kernel_csv, write_pattern_csv, write_raster_csv,
    write_spatial_csv, write_summary_csv, write_trace_csv, write_w_csv, SummaryRow,
};
use crate::plots::{heatmap, line_plot, Series};

/// Outcome of one replication of one sample-size cell.
#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub n: usize,
    pub replication: usize,
    pub total_events: usize,
    pub posterior_abs_l2: Option<f64>,
    pub posterior_rel_l2: Option<f64>,
    pub kernel_abs_l2: Option<f64>,
    pub kernel_rel_l2: Option<f64>,
    pub pcn_acceptance: f64,
    pub zeta_final: f64,
    pub ell_posterior_mean: Vec<f64>,
    /// Fraction of grid points where the truth lies inside the band.
    pub band_coverage: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<SummaryRow>,
    pub replications: Vec<ReplicationResult>,
    /// (n, replication, error message) for aborted replications.
    pub failures: Vec<(usize, usize, String)>,
    pub warnings: Vec<String>,
}

/// Inclusive uniform grid over the window, flattened points.
pub fn window_grid(window: &Window, per_axis: usize) -> Vec<f64> {
    let d = window.dim();
    let total = per_axis.pow(d as u32);
    let mut out = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        for a in 0..d {
            let h = (window.upper()[a] - window.lower()[a]) / (per_axis - 1) as f64;
            out.push(window.lower()[a] + idx[a] as f64 * h);
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

struct ReplicationArtifacts {
    result: ReplicationResult,
    trace: ChainTrace,
    dataset: Dataset,
    estimate: coxgp::summaries::IntensityEstimate,
    kernel: Option<coxgp::kernel::KernelEstimate>,
}

fn run_replication(
    config: &ExperimentConfig,
    shared: Option<&Dataset>,
    basis: &InterpolationBasis,
    quadrature: &QuadratureRule,
    zgrid: &ZGrid,
    n: usize,
    replication: usize,
    seed: u64,
) -> Result<ReplicationArtifacts> {
    let window = config.window.build()?;
    let truth = config.truth_spec()?;
    let dataset = match (config.scenario, shared) {
        (Scenario::ExternalData, Some(ds)) => ds.clone(),
        (Scenario::SimulateFromTruth, _) => {
            let sampler = FieldSampler::new(
                window.clone(),
                config.field.resolution,
                &config.field.lengthscales,
                config.field.preprocess.to_core(),
            )?;
            let spec = truth.expect("validated config has a truth");
            let upper = spec.rho_upper();
            simulate_dataset(n, &sampler, |z| spec.eval(z).unwrap(), upper, seed)?
        }
        (Scenario::ExternalData, None) => {
            return Err(CliError::Config("external dataset not loaded".into()))
        }
    };
    let ctx = LikelihoodContext::new(&dataset, quadrature, basis)?;
    let chain_seed = child_seed(seed, 0x51ee9);
    let core_cfg = config.sampler.to_core(chain_seed);
    let trace = run_chain(&ctx, basis, &config.hyper.to_core(), &core_cfg)?;
    let estimate = intensity_estimate(
        &trace,
        core_cfg.burn_in,
        basis,
        zgrid,
        config.credible_level,
    )?;
    let (post_abs, post_rel) = match truth {
        Some(spec) => {
            let (a, r) = l2_error(&estimate.mean, &spec, zgrid)?;
            (Some(a), Some(r))
        }
        None => (None, None),
    };
    let band_coverage = match truth {
        Some(spec) => {
            let mut inside = 0usize;
            for (i, z) in zgrid.points().enumerate() {
                let t = spec.eval(z)?;
                if t >= estimate.lower[i] && t <= estimate.upper[i] {
                    inside += 1;
                }
            }
            Some(inside as f64 / zgrid.len() as f64)
        }
        None => None,
    };
    let kernel = if config.baseline && dataset.dim_z() <= 2 {
        Some(kernel_estimate_average(
            &dataset,
            quadrature,
            zgrid,
            KernelVariant::PlainAverage,
        )?)
    } else {
        None
    };
    let (kern_abs, kern_rel) = match (&kernel, truth) {
        (Some(k), Some(spec)) => {
            let (a, r) = l2_error(&k.values, &spec, zgrid)?;
            (Some(a), Some(r))
        }
        _ => (None, None),
    };
    let d = dataset.dim_z();
    let ell_posterior_mean: Vec<f64> = (0..d)
        .map(|j| trace.posterior_mean_scalar(core_cfg.burn_in, |rec| rec.ell[j]))
        .collect();
    let result = ReplicationResult {
        n,
        replication,
        total_events: dataset.total_events(),
        posterior_abs_l2: post_abs,
        posterior_rel_l2: post_rel,
        kernel_abs_l2: kern_abs,
        kernel_rel_l2: kern_rel,
        pcn_acceptance: trace.pcn_acceptance_after(core_cfg.burn_in),
        zeta_final: trace.zeta_final,
        ell_posterior_mean,
        band_coverage,
    };
    Ok(ReplicationArtifacts {
        result,
        trace,
        dataset,
        estimate,
        kernel,
    })
}

fn write_replication_files(
    config: &ExperimentConfig,
    out_dir: &Path,
    art: &ReplicationArtifacts,
    zgrid: &ZGrid,
) -> Result<()> {
    let n_dir = out_dir.join(format!("n{}", art.result.n));
    let r = art.result.replication;
    write_trace_csv(&n_dir.join(format!("trace_{r}.csv")), &art.trace)?;
    if config.w_binary {
        crate::formats::write_w_binary(&n_dir.join(format!("w_{r}.bin")), &art.trace)?;
    } else {
        write_w_csv(&n_dir.join(format!("w_{r}.csv")), &art.trace)?;
    }
    write_estimate_csv(&n_dir.join(format!("estimate_{r}.csv")), &art.estimate)?;
    if let Some(k) = &art.kernel {
        write_kernel_csv(&n_dir.join(format!("baseline_{r}.csv")), k)?;
    }
    // plug-in spatial intensity of the posterior mean with the first
    // replicate's covariate field
    let window = config.window.build()?;
    let xpoints = window_grid(&window, 40);
    let field = &art.dataset.pair(0).1;
    let spatial = plugin_spatial_intensity(&art.estimate.mean, zgrid, field, &xpoints)?;
    write_spatial_csv(
        &n_dir.join(format!("spatial_{r}.csv")),
        window.dim(),
        &xpoints,
        &spatial,
    )?;
    Ok(())
}

fn write_replication_plots(
    config: &ExperimentConfig,
    out_dir: &Path,
    art: &ReplicationArtifacts,
    zgrid: &ZGrid,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let n_dir = out_dir.join(format!("n{}", art.result.n));
    let r = art.result.replication;
    let truth = config.truth_spec()?;
    match zgrid.dim() {
        1 => {
            let x: Vec<f64> = zgrid.points().map(|z| z[0]).collect();
            let truth_vals: Option<Vec<f64>> =
                truth.map(|t| zgrid.points().map(|z| t.eval(z).unwrap()).collect());
            let mut series = vec![
                Series {
                    label: "lower",
                    color: "#9ecae1",
                    x: &x,
                    y: &art.estimate.lower,
                    dashed: false,
                },
                Series {
                    label: "upper",
                    color: "#9ecae1",
                    x: &x,
                    y: &art.estimate.upper,
                    dashed: false,
                },
                Series {
                    label: "posterior mean",
                    color: "#1f77b4",
                    x: &x,
                    y: &art.estimate.mean,
                    dashed: false,
                },
            ];
            if let Some(tv) = &truth_vals {
                series.push(Series {
                    label: "truth",
                    color: "black",
                    x: &x,
                    y: tv,
                    dashed: false,
                });
            }
            if let Some(k) = &art.kernel {
                series.push(Series {
                    label: "kernel average",
                    color: "#d62728",
                    x: &x,
                    y: &k.values,
                    dashed: true,
                });
            }
            line_plot(
                &n_dir.join(format!("estimate_{r}.svg")),
                &format!("intensity estimate, n = {}", art.result.n),
                &series,
                Some((0, 1)),
            )?;
        }
        2 => {
            let per = zgrid.per_axis();
            heatmap(
                &n_dir.join(format!("estimate_{r}.svg")),
                &format!("posterior mean, n = {}", art.result.n),
                &art.estimate.mean,
                per[0],
                per[1],
            )?;
            if let Some(t) = truth {
                let tv: Vec<f64> = zgrid.points().map(|z| t.eval(z).unwrap()).collect();
                heatmap(
                    &n_dir.join("truth.svg"),
                    &format!("ground truth {}", t.name()),
                    &tv,
                    per[0],
                    per[1],
                )?;
            }
        }
        _ => {}
    }
    // trace plots
    if art.trace.sweeps.len() <= 1 {
        warnings.push(format!(
            "n{} replication {r}: empty trace, no trace plots emitted",
            art.result.n
        ));
        return Ok(());
    }
    let sweeps: Vec<f64> = art.trace.sweeps.iter().map(|s| s.sweep as f64).collect();
    let rho: Vec<f64> = art.trace.sweeps.iter().map(|s| s.rho_star).collect();
    let loglik: Vec<f64> = art.trace.sweeps.iter().map(|s| s.loglik).collect();
    line_plot(
        &n_dir.join(format!("trace_rho_star_{r}.svg")),
        "rho* trace",
        &[Series {
            label: "rho*",
            color: "#1f77b4",
            x: &sweeps,
            y: &rho,
            dashed: false,
        }],
        None,
    )?;
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    let ell_cols: Vec<Vec<f64>> = (0..art.trace.dim)
        .map(|j| art.trace.sweeps.iter().map(|s| s.ell[j]).collect())
        .collect();
    let ell_series: Vec<Series> = ell_cols
        .iter()
        .enumerate()
        .map(|(j, y)| Series {
            label: ["ell_1", "ell_2", "ell_3"][j.min(2)],
            color: colors[j % colors.len()],
            x: &sweeps,
            y,
            dashed: false,
        })
        .collect();
    line_plot(
        &n_dir.join(format!("trace_ell_{r}.svg")),
        "length-scale trace",
        &ell_series,
        None,
    )?;
    line_plot(
        &n_dir.join(format!("trace_loglik_{r}.svg")),
        "log-likelihood trace",
        &[Series {
            label: "loglik",
            color: "#2ca02c",
            x: &sweeps,
            y: &loglik,
            dashed: false,
        }],
        None,
    )?;
    Ok(())
}

/// Run the full experiment described by `config`, writing artifacts under
/// `out_dir`. Replications are dispatched onto the ambient rayon pool;
/// outputs are identical for any thread count.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    let basis = build_basis(config.basis.dim(), config.basis.to_core())?;
    let window = config.window.build()?;
    let quadrature = build_quadrature(&window, config.quadrature_cells_per_axis)?;
    let zgrid = ZGrid::uniform(&config.zgrid)?;

    let shared = match config.scenario {
        Scenario::ExternalData => {
            let data = config.data.as_ref().expect("validated");
            let ds = crate::formats::load_dataset(
                Path::new(&data.pattern_file),
                Path::new(&data.raster_file),
                config.field.preprocess,
            )?;
            if ds.dim_z() != config.basis.dim() {
                return Err(CliError::Config(format!(
                    "raster has {} covariates but the basis is {}-dimensional",
                    ds.dim_z(),
                    config.basis.dim()
                )));
            }
            Some(ds)
        }
        Scenario::SimulateFromTruth => None,
    };

    // external data fixes the sample size; replications become chains
    let ns: Vec<usize> = match &shared {
        Some(ds) => vec![ds.len()],
        None => config.n.clone(),
    };
    let mut tasks: Vec<(usize, usize, usize)> = Vec::new();
    for (n_idx, &n) in ns.iter().enumerate() {
        for r in 0..config.replications {
            tasks.push((n_idx, n, r));
        }
    }

    let outcomes: Vec<(usize, usize, Result<ReplicationArtifacts>)> = tasks
        .par_iter()
        .map(|&(n_idx, n, r)| {
            let seed = child_seed(child_seed(config.seed, n_idx as u64), r as u64);
            let art = run_replication(
                config,
                shared.as_ref(),
                &basis,
                &quadrature,
                &zgrid,
                n,
                r,
                seed,
            );
            (n, r, art)
        })
        .collect();

    let mut report = ExperimentReport::default();
    let mut artifacts: Vec<ReplicationArtifacts> = Vec::new();
    for (n, r, outcome) in outcomes {
        match outcome {
            Ok(art) => artifacts.push(art),
            Err(e) => report.failures.push((n, r, e.to_string())),
        }
    }
    for art in &artifacts {
        write_replication_files(config, out_dir, art, &zgrid)?;
        if art.result.replication == 0 {
            write_replication_plots(config, out_dir, art, &zgrid, &mut report.warnings)?;
        }
        report.replications.push(art.result.clone());
    }

    // summary table: estimator x metric rows, one block per n
    for &n in &ns {
        let of_n: Vec<&ReplicationResult> = report
            .replications
            .iter()
            .filter(|r| r.n == n)
            .collect();
        if of_n.is_empty() {
            continue;
        }
        let collect = |f: &dyn Fn(&ReplicationResult) -> Option<f64>| -> Vec<f64> {
            of_n.iter().filter_map(|r| f(r)).collect()
        };
        let mut push_row = |estimator: &str, metric: &str, vals: Vec<f64>| {
            if vals.is_empty() {
                return;
            }
            let (mean, sd) = summarize(&vals);
            report.rows.push(SummaryRow {
                estimator: estimator.into(),
                metric: metric.into(),
                n,
                mean,
                sd,
                replications: vals.len(),
            });
        };
        push_row("posterior_mean", "l2", collect(&|r| r.posterior_abs_l2));
        push_row(
            "posterior_mean",
            "relative_l2",
            collect(&|r| r.posterior_rel_l2),
        );
        push_row("kernel_average", "l2", collect(&|r| r.kernel_abs_l2));
        push_row(
            "kernel_average",
            "relative_l2",
            collect(&|r| r.kernel_rel_l2),
        );
        push_row(
            "sampler",
            "pcn_acceptance",
            collect(&|r| Some(r.pcn_acceptance)),
        );
        push_row(
            "sampler",
            "mean_events",
            collect(&|r| Some(r.total_events as f64 / r.n as f64)),
        );
        push_row("posterior_mean", "band_coverage", collect(&|r| r.band_coverage));
        let d = config.field.lengthscales.len();
        for j in 0..d {
            push_row(
                "sampler",
                &format!("ell_{}_posterior_mean", j + 1),
                collect(&|r| Some(r.ell_posterior_mean[j])),
            );
        }
        if d == 2 {
            push_row(
                "sampler",
                "ell_ratio",
                collect(&|r| Some(r.ell_posterior_mean[0] / r.ell_posterior_mean[1])),
            );
        }
    }
    write_summary_csv(&out_dir.join("summary.csv"), &report.rows)?;
    if !report.failures.is_empty() {
        let mut text = String::from("n,replication,error\n");
        for (n, r, e) in &report.failures {
            text.push_str(&format!("{n},{r},\"{}\"\n", e.replace('"', "'")));
        }
        std::fs::create_dir_all(out_dir).map_err(CliError::io(out_dir.display().to_string()))?;
        std::fs::write(out_dir.join("failures.csv"), text)
            .map_err(CliError::io(out_dir.display().to_string()))?;
    }
    Ok(report)
}

/// Simulate one dataset from the config's truth and write the pattern and
/// raster files (the inputs consumed by `fit` and `baseline`).
pub fn simulate_to_files(config: &ExperimentConfig, n: usize, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    config.validate()?;
    let window = config.window.build()?;
    let spec = config
        .truth_spec()?
        .ok_or_else(|| CliError::Config("simulate needs a truth".into()))?;
    let sampler = FieldSampler::new(
        window,
        config.field.resolution,
        &config.field.lengthscales,
        config.field.preprocess.to_core(),
    )?;
    let dataset = simulate_dataset(
        n,
        &sampler,
        |z| spec.eval(z).unwrap(),
        spec.rho_upper(),
        config.seed,
    )?;
    let pattern_path = out_dir.join("pattern.csv");
    let raster_path = out_dir.join("raster.csv");
    write_pattern_csv(&pattern_path, &dataset)?;
    write_raster_csv(&raster_path, &dataset)?;
    Ok((pattern_path, raster_path))
}
