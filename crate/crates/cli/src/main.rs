use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coxgp::geometry::{build_basis, build_quadrature};
use coxgp::likelihood::LikelihoodContext;
use coxgp::sampler::run_chain;
use coxgp::stats::{mean, std_dev};
use coxgp::summaries::{intensity_estimate, l2_error, ZGrid};

use coxgp_cli::config::ExperimentConfig;
use coxgp_cli::error::{CliError, Result};
use coxgp_cli::experiment::{run_experiment, simulate_to_files};
use coxgp_cli::formats;

#[derive(Parser)]
#[command(
    name = "coxgp",
    about = "Bayesian intensity estimation for covariate-driven point processes",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Experiment config JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset used when no config file is given.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset from the configured truth and write pattern +
    /// raster CSV files.
    Simulate {
        /// Number of replicates (defaults to the first entry of config.n).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Fit the posterior sampler to a dataset loaded from files.
    Fit {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        raster: PathBuf,
    },
    /// Averaged kernel baseline estimate for a dataset loaded from files.
    Baseline {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        raster: PathBuf,
    },
    /// Recompute estimate grids (and errors against the configured truth)
    /// from stored trace and w CSV files.
    Summarize {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        w: PathBuf,
    },
    /// Full synthetic experiment: simulate, fit, baseline, error table.
    Experiment,
    /// Acceptance rates and posterior scalar summaries from a trace CSV.
    Diagnostics {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
    },
}

fn load_config(global: &GlobalArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&global.config, &global.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(CliError::io(path.display().to_string()))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => {
            return Err(CliError::Config(
                "pass --config <file> or --preset <name>".into(),
            ))
        }
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let out = cli.global.out.clone();
    match cli.command {
        Command::Simulate { n } => {
            let cfg = load_config(&cli.global)?;
            let n = n.unwrap_or(cfg.n[0]);
            let (pattern, raster) = simulate_to_files(&cfg, n, &out)?;
            println!("wrote {} and {}", pattern.display(), raster.display());
        }
        Command::Fit { pattern, raster } => {
            let cfg = load_config(&cli.global)?;
            let dataset = formats::load_dataset(&pattern, &raster, cfg.field.preprocess)?;
            let basis = build_basis(cfg.basis.dim(), cfg.basis.to_core())?;
            let quad = build_quadrature(dataset.window(), cfg.quadrature_cells_per_axis)?;
            let ctx = LikelihoodContext::new(&dataset, &quad, &basis)?;
            let sampler_cfg = cfg.sampler.to_core(cfg.seed);
            let trace = run_chain(&ctx, &basis, &cfg.hyper.to_core(), &sampler_cfg)?;
            let zgrid = ZGrid::uniform(&cfg.zgrid)?;
            let estimate =
                intensity_estimate(&trace, sampler_cfg.burn_in, &basis, &zgrid, cfg.credible_level)?;
            formats::write_trace_csv(&out.join("trace_0.csv"), &trace)?;
            formats::write_w_csv(&out.join("w_0.csv"), &trace)?;
            formats::write_estimate_csv(&out.join("estimate_0.csv"), &estimate)?;
            println!(
                "fit {} replicates, {} events; pCN acceptance {:.3}; outputs in {}",
                dataset.len(),
                dataset.total_events(),
                trace.pcn_acceptance_after(sampler_cfg.burn_in),
                out.display()
            );
        }
        Command::Baseline { pattern, raster } => {
            let cfg = load_config(&cli.global)?;
            let dataset = formats::load_dataset(&pattern, &raster, cfg.field.preprocess)?;
            let quad = build_quadrature(dataset.window(), cfg.quadrature_cells_per_axis)?;
            let zgrid = ZGrid::uniform(&cfg.zgrid)?;
            let estimate = coxgp::kernel::kernel_estimate_average(
                &dataset,
                &quad,
                &zgrid,
                coxgp::kernel::KernelVariant::PlainAverage,
            )?;
            formats::write_kernel_csv(&out.join("baseline_0.csv"), &estimate)?;
            println!("wrote {}", out.join("baseline_0.csv").display());
        }
        Command::Summarize { trace, w } => {
            let cfg = load_config(&cli.global)?;
            let table = formats::read_trace_csv(&trace)?;
            let snapshots = formats::read_w_csv(&w, &table)?;
            let basis = build_basis(cfg.basis.dim(), cfg.basis.to_core())?;
            let zgrid = ZGrid::uniform(&cfg.zgrid)?;
            let rebuilt = coxgp::sampler::ChainTrace {
                dim: table.dim,
                basis_len: basis.len(),
                sweeps: table.records,
                snapshots,
                accepts: Default::default(),
                zeta_final: cfg.sampler.zeta,
            };
            let estimate = intensity_estimate(
                &rebuilt,
                cfg.sampler.burn_in,
                &basis,
                &zgrid,
                cfg.credible_level,
            )?;
            formats::write_estimate_csv(&out.join("estimate_0.csv"), &estimate)?;
            if let Some(spec) = cfg.truth_spec()? {
                let (abs, rel) = l2_error(&estimate.mean, &spec, &zgrid)?;
                println!("L2 error vs {}: {abs:.4} (relative {rel:.4})", spec.name());
            }
            println!("wrote {}", out.join("estimate_0.csv").display());
        }
        Command::Experiment => {
            let cfg = load_config(&cli.global)?;
            let out_dir = cfg
                .out
                .clone()
                .map(PathBuf::from)
                .unwrap_or_else(|| out.clone());
            let report = run_experiment(&cfg, &out_dir)?;
            println!("summary ({} rows):", report.rows.len());
            for row in &report.rows {
                println!(
                    "  {:>14} {:>22} n={:<5} mean={:.4} sd={:.4} ({} reps)",
                    row.estimator, row.metric, row.n, row.mean, row.sd, row.replications
                );
            }
            for (n, r, e) in &report.failures {
                eprintln!("replication failure at n={n} r={r}: {e}");
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("artifacts in {}", out_dir.display());
        }
        Command::Diagnostics { trace, burn_in } => {
            diagnostics(&trace, burn_in, &out)?;
        }
    }
    Ok(())
}

fn diagnostics(trace_path: &Path, burn_in: usize, out: &Path) -> Result<()> {
    let table = formats::read_trace_csv(trace_path)?;
    let post: Vec<_> = table
        .records
        .iter()
        .filter(|r| r.sweep > burn_in)
        .collect();
    if post.is_empty() {
        return Err(CliError::Config("no post-burn-in sweeps in trace".into()));
    }
    let rate = |f: &dyn Fn(&coxgp::sampler::SweepRecord) -> bool| {
        post.iter().filter(|r| f(r)).count() as f64 / post.len() as f64
    };
    let mut lines = vec![format!(
        "{} sweeps ({} post burn-in), d = {}",
        table.records.len() - 1,
        post.len(),
        table.dim
    )];
    let col = |f: &dyn Fn(&coxgp::sampler::SweepRecord) -> f64| -> (f64, f64) {
        let vals: Vec<f64> = post.iter().map(|r| f(r)).collect();
        (mean(&vals), std_dev(&vals))
    };
    let (m, s) = col(&|r| r.rho_star);
    lines.push(format!("rho*      mean {m:.4} sd {s:.4}"));
    for j in 0..table.dim {
        let (m, s) = col(&|r| r.theta[j]);
        lines.push(format!(
            "theta_{}   mean {m:.4} sd {s:.4} accept {:.3}",
            j + 1,
            rate(&|r| r.accept_theta[j])
        ));
        let (m, s) = col(&|r| r.ell[j]);
        lines.push(format!(
            "ell_{}     mean {m:.4} sd {s:.4} accept {:.3}",
            j + 1,
            rate(&|r| r.accept_ell[j])
        ));
    }
    if table.dim == 2 {
        let (m1, _) = col(&|r| r.ell[0]);
        let (m2, _) = col(&|r| r.ell[1]);
        lines.push(format!("ell_1/ell_2 posterior-mean ratio {:.3}", m1 / m2));
    }
    let (m, s) = col(&|r| r.loglik);
    lines.push(format!("loglik    mean {m:.4} sd {s:.4}"));
    lines.push(format!("pCN accept {:.3}", rate(&|r| r.accept_pcn)));
    let text = lines.join("\n");
    println!("{text}");
    std::fs::create_dir_all(out).map_err(CliError::io(out.display().to_string()))?;
    std::fs::write(out.join("diagnostics.txt"), text + "\n")
        .map_err(CliError::io(out.display().to_string()))?;
    let sweeps: Vec<f64> = table.records.iter().map(|r| r.sweep as f64).collect();
    let rho: Vec<f64> = table.records.iter().map(|r| r.rho_star).collect();
    let loglik: Vec<f64> = table.records.iter().map(|r| r.loglik).collect();
    coxgp_cli::plots::line_plot(
        &out.join("trace_rho_star.svg"),
        "rho* trace",
        &[coxgp_cli::plots::Series {
            label: "rho*",
            color: "#1f77b4",
            x: &sweeps,
            y: &rho,
            dashed: false,
        }],
        None,
    )?;
    coxgp_cli::plots::line_plot(
        &out.join("trace_loglik.svg"),
        "log-likelihood trace",
        &[coxgp_cli::plots::Series {
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
