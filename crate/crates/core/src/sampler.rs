//! Metropolis-within-Gibbs posterior sampler: conjugate gamma block for
//! rho*, independence MH for each theta_j, adaptive random-walk MH for each
//! ell_j, and a preconditioned Crank-Nicolson step for w.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::InterpolationBasis;
use crate::likelihood::LikelihoodContext;
use crate::model::{sample_prior, HyperParams, LatentState, NodeDistances};
use crate::rng::seed_rng;

/// Chain initialization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Cold start randomly drawn from the prior.
    Prior,
    /// w = 0, theta = 1/2, ell = 1, rho* at its prior mean.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    /// pCN step size in (0, 1/2).
    pub zeta: f64,
    /// Double/halve zeta toward the target pCN acceptance during burn-in.
    pub tune_zeta: bool,
    /// Initial random-walk proposal standard deviation on the log scale.
    pub initial_step: f64,
    /// Robbins-Monro decay exponent for the step-size adaptation.
    pub adapt_rate: f64,
    /// Target acceptance rate for the adaptive random-walk updates.
    pub target_accept: f64,
    /// Stride between stored w snapshots.
    pub thin: usize,
    pub seed: u64,
    pub init: InitMode,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            iterations: 20_000,
            burn_in: 5_000,
            zeta: 0.2,
            tune_zeta: true,
            initial_step: 1.0,
            adapt_rate: 0.6,
            target_accept: 0.3,
            thin: 10,
            seed: 0,
            init: InitMode::Prior,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0 && self.zeta < 0.5) {
            return Err(Error::InvalidArgument("zeta must lie in (0, 1/2)".into()));
        }
        if self.burn_in >= self.iterations && self.iterations > 0 {
            return Err(Error::InvalidArgument("burn_in must be < iterations".into()));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be >= 1".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidArgument("target_accept must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// Scalar record of one sweep, including per-block acceptance flags.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub sweep: usize,
    pub rho_star: f64,
    pub theta: Vec<f64>,
    pub ell: Vec<f64>,
    pub loglik: f64,
    pub accept_theta: Vec<bool>,
    pub accept_ell: Vec<bool>,
    pub accept_pcn: bool,
}

/// Thinned snapshot with everything needed to evaluate the intensity.
#[derive(Debug, Clone)]
pub struct WSnapshot {
    pub sweep: usize,
    pub rho_star: f64,
    pub w: Vec<f64>,
}

/// Cumulative accepted-transition counts per block.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcceptCounts {
    pub theta: Vec<usize>,
    pub ell: Vec<usize>,
    pub pcn: usize,
    /// Proposals rejected because the proposed covariance failed to factor.
    pub ell_factorization_failures: usize,
}

/// Stored output of one chain.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    pub dim: usize,
    pub basis_len: usize,
    /// Record 0 is the initial state; records 1..=iterations follow sweeps.
    pub sweeps: Vec<SweepRecord>,
    pub snapshots: Vec<WSnapshot>,
    pub accepts: AcceptCounts,
    /// pCN step size in force after burn-in tuning.
    pub zeta_final: f64,
}

impl ChainTrace {
    /// Acceptance rate of the pCN block over post-burn-in sweeps.
    pub fn pcn_acceptance_after(&self, burn_in: usize) -> f64 {
        let post: Vec<&SweepRecord> =
            self.sweeps.iter().filter(|r| r.sweep > burn_in).collect();
        if post.is_empty() {
            return 0.0;
        }
        post.iter().filter(|r| r.accept_pcn).count() as f64 / post.len() as f64
    }

    /// Posterior mean of a scalar column over post-burn-in sweeps.
    pub fn posterior_mean_scalar<F: Fn(&SweepRecord) -> f64>(&self, burn_in: usize, f: F) -> f64 {
        let vals: Vec<f64> = self
            .sweeps
            .iter()
            .filter(|r| r.sweep > burn_in)
            .map(f)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

/// Unnormalized log full conditional of theta_j given ell_j (the
/// length-scale exponent block).
pub fn theta_log_target(ell_j: f64, theta: f64, hyper: &HyperParams, d: usize) -> f64 {
    let df = d as f64;
    hyper.a_gamma * df / theta * ell_j.ln() - hyper.b_gamma * ell_j.powf(df / theta)
        + (hyper.a_theta - 2.0) * theta.ln()
        + (hyper.b_theta - 1.0) * (1.0 - theta).ln()
}

/// Log of the hyper-prior factor of the ell_j full conditional:
/// (a_gamma d / theta - 1) log ell - b_gamma ell^(d/theta).
pub fn ell_log_prior_term(ell_j: f64, theta_j: f64, hyper: &HyperParams, d: usize) -> f64 {
    let df = d as f64;
    (hyper.a_gamma * df / theta_j - 1.0) * ell_j.ln() - hyper.b_gamma * ell_j.powf(df / theta_j)
}

/// One MCMC chain owning its state, RNG and adaptation bookkeeping.
pub struct Chain<'a> {
    ctx: &'a LikelihoodContext,
    dists: &'a NodeDistances,
    hyper: HyperParams,
    pub state: LatentState,
    rng: ChaCha8Rng,
    zeta: f64,
    /// cached sum_i integral sigma(w(Z^i)) for the current w
    sigma_integral: f64,
    /// cached sum over events of log sigma(w(Z(X_k)))
    event_log_sigma: f64,
    log_step: Vec<f64>,
    adapt_count: Vec<usize>,
    adapt_frozen: bool,
    factorization_failures: usize,
    target_accept: f64,
    adapt_rate: f64,
    beta_proposal: Beta<f64>,
}

impl<'a> Chain<'a> {
    pub fn new(
        ctx: &'a LikelihoodContext,
        dists: &'a NodeDistances,
        hyper: HyperParams,
        cfg: &SamplerConfig,
    ) -> Result<Chain<'a>> {
        hyper.validate()?;
        cfg.validate()?;
        let mut rng = seed_rng(cfg.seed);
        let d = dists.dim();
        let state = match cfg.init {
            InitMode::Prior => sample_prior(&hyper, dists, &mut rng)?,
            InitMode::Deterministic => LatentState::new(
                hyper.a_rho / hyper.b_rho,
                vec![0.5; d],
                vec![1.0; d],
                vec![0.0; dists.len()],
                dists,
            )?,
        };
        let sigma_integral = ctx.integral_of_sigma(&state.w);
        let event_log_sigma = ctx.event_log_sigma_sum(&state.w);
        let beta_proposal = Beta::new(hyper.a_theta, hyper.b_theta)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Chain {
            ctx,
            dists,
            hyper,
            state,
            rng,
            zeta: cfg.zeta,
            sigma_integral,
            event_log_sigma,
            log_step: vec![cfg.initial_step.ln(); d],
            adapt_count: vec![0; d],
            adapt_frozen: false,
            factorization_failures: 0,
            target_accept: cfg.target_accept,
            adapt_rate: cfg.adapt_rate,
            beta_proposal,
        })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn set_zeta(&mut self, zeta: f64) {
        self.zeta = zeta.clamp(1e-3, 0.499);
    }

    pub fn sigma_integral(&self) -> f64 {
        self.sigma_integral
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Replace w (test harnesses and restarts); refreshes the caches.
    pub fn set_w(&mut self, w: Vec<f64>) {
        self.sigma_integral = self.ctx.integral_of_sigma(&w);
        self.event_log_sigma = self.ctx.event_log_sigma_sum(&w);
        self.state.w = w;
    }

    pub fn log_likelihood(&self) -> f64 {
        self.ctx.log_likelihood_from_parts(
            self.state.rho_star,
            self.event_log_sigma,
            self.sigma_integral,
        )
    }

    /// Conjugate update: rho* ~ Gamma(a + sum K, b + integral of sigma).
    pub fn gibbs_rho_star(&mut self) {
        let shape = self.hyper.a_rho + self.ctx.total_events() as f64;
        let rate = self.hyper.b_rho + self.sigma_integral;
        self.state.rho_star = Gamma::new(shape, 1.0 / rate)
            .expect("positive shape and rate")
            .sample(&mut self.rng);
    }

    /// Independence MH for theta_j with the beta hyper-prior as proposal.
    /// The beta factors cancel except for a residual 1/theta.
    pub fn mh_theta(&mut self, j: usize) -> bool {
        let d = self.dists.dim();
        let ell = self.state.ell[j];
        let theta = self.state.theta[j];
        let proposal: f64 = self.beta_proposal.sample(&mut self.rng);
        let log_ratio = self.hyper.a_gamma * d as f64 * ell.ln() * (1.0 / proposal - 1.0 / theta)
            - self.hyper.b_gamma
                * (ell.powf(d as f64 / proposal) - ell.powf(d as f64 / theta))
            + theta.ln()
            - proposal.ln();
        let u: f64 = self.rng.gen();
        if u.ln() < log_ratio {
            self.state.theta[j] = proposal;
            true
        } else {
            false
        }
    }

    /// Adaptive random-walk MH for ell_j on the log scale, including the
    /// Gaussian-prior factor of w under the proposed covariance and the
    /// log-scale Jacobian.
    pub fn arwm_ell(&mut self, j: usize) -> bool {
        let step = self.log_step[j].exp();
        let eps: f64 = self.rng.sample(StandardNormal);
        let cur = self.state.ell[j];
        let proposal = (cur.ln() + step * eps).exp();
        let mut ell_new = self.state.ell.clone();
        ell_new[j] = proposal;

        let mut accepted = false;
        let mut alpha = 0.0;
        match self.dists.factor(&ell_new) {
            Ok(factor_new) => {
                let cur_gauss = self.state.log_prior_w();
                let new_gauss = crate::model::log_gaussian_prior(&self.state.w, &factor_new);
                let log_ratio = new_gauss - cur_gauss
                    + ell_log_prior_term(proposal, self.state.theta[j], &self.hyper, self.dists.dim())
                    - ell_log_prior_term(cur, self.state.theta[j], &self.hyper, self.dists.dim())
                    + proposal.ln()
                    - cur.ln();
                alpha = log_ratio.exp().min(1.0);
                let u: f64 = self.rng.gen();
                if u < alpha {
                    self.state.set_ell(j, proposal, factor_new);
                    accepted = true;
                }
            }
            Err(_) => {
                self.factorization_failures += 1;
            }
        }
        if !self.adapt_frozen {
            self.adapt_count[j] += 1;
            let t = self.adapt_count[j] as f64;
            self.log_step[j] += t.powf(-self.adapt_rate) * (alpha - self.target_accept);
        }
        accepted
    }

    /// Preconditioned Crank-Nicolson update of w: proposal
    /// sqrt(1 - 2 zeta) w + sqrt(2 zeta) xi with xi a prior draw, accepted
    /// with the likelihood ratio.
    pub fn pcn_w(&mut self) -> bool {
        let v = self.dists.len();
        let eps: Vec<f64> = (0..v).map(|_| self.rng.sample(StandardNormal)).collect();
        let mut xi = vec![0.0; v];
        self.state.factor().l_mul_slice(&eps, &mut xi);
        let a = (1.0 - 2.0 * self.zeta).sqrt();
        let b = (2.0 * self.zeta).sqrt();
        let proposal: Vec<f64> = self
            .state
            .w
            .iter()
            .zip(&xi)
            .map(|(wv, xv)| a * wv + b * xv)
            .collect();
        let new_integral = self.ctx.integral_of_sigma(&proposal);
        let new_event = self.ctx.event_log_sigma_sum(&proposal);
        let log_ratio = (new_event - self.event_log_sigma)
            - self.state.rho_star * (new_integral - self.sigma_integral);
        let u: f64 = self.rng.gen();
        if u.ln() < log_ratio {
            self.state.w = proposal;
            self.sigma_integral = new_integral;
            self.event_log_sigma = new_event;
            true
        } else {
            false
        }
    }

    /// One full Gibbs sweep in the fixed block order.
    pub fn sweep(&mut self) -> (Vec<bool>, Vec<bool>, bool) {
        self.gibbs_rho_star();
        let d = self.dists.dim();
        let mut acc_theta = Vec::with_capacity(d);
        for j in 0..d {
            acc_theta.push(self.mh_theta(j));
        }
        let mut acc_ell = Vec::with_capacity(d);
        for j in 0..d {
            acc_ell.push(self.arwm_ell(j));
        }
        let acc_pcn = self.pcn_w();
        (acc_theta, acc_ell, acc_pcn)
    }

    pub fn freeze_adaptation(&mut self) {
        self.adapt_frozen = true;
    }

    /// Proposals rejected because the proposed covariance failed to factor.
    pub fn factorization_failures(&self) -> usize {
        self.factorization_failures
    }

    fn record(&self, sweep: usize, acc: (Vec<bool>, Vec<bool>, bool)) -> SweepRecord {
        SweepRecord {
            sweep,
            rho_star: self.state.rho_star,
            theta: self.state.theta.clone(),
            ell: self.state.ell.clone(),
            loglik: self.log_likelihood(),
            accept_theta: acc.0,
            accept_ell: acc.1,
            accept_pcn: acc.2,
        }
    }
}

/// Run one full chain; deterministic given the config seed.
pub fn run_chain(
    ctx: &LikelihoodContext,
    basis: &InterpolationBasis,
    hyper: &HyperParams,
    cfg: &SamplerConfig,
) -> Result<ChainTrace> {
    let dists = NodeDistances::from_basis(basis);
    let mut chain = Chain::new(ctx, &dists, *hyper, cfg)?;
    let d = dists.dim();
    let mut trace = ChainTrace {
        dim: d,
        basis_len: dists.len(),
        sweeps: Vec::with_capacity(cfg.iterations + 1),
        snapshots: Vec::new(),
        accepts: AcceptCounts {
            theta: vec![0; d],
            ell: vec![0; d],
            ..AcceptCounts::default()
        },
        zeta_final: cfg.zeta,
    };
    trace
        .sweeps
        .push(chain.record(0, (vec![false; d], vec![false; d], false)));
    trace.snapshots.push(WSnapshot {
        sweep: 0,
        rho_star: chain.state.rho_star,
        w: chain.state.w.clone(),
    });

    // zeta tuning window (burn-in only)
    let tune_window = 100usize;
    let mut window_accepts = 0usize;
    let mut window_total = 0usize;

    for sweep in 1..=cfg.iterations {
        if sweep == cfg.burn_in + 1 {
            chain.freeze_adaptation();
        }
        let acc = chain.sweep();
        for (j, &a) in acc.0.iter().enumerate() {
            if a {
                trace.accepts.theta[j] += 1;
            }
        }
        for (j, &a) in acc.1.iter().enumerate() {
            if a {
                trace.accepts.ell[j] += 1;
            }
        }
        if acc.2 {
            trace.accepts.pcn += 1;
            window_accepts += 1;
        }
        window_total += 1;

        if cfg.tune_zeta && sweep <= cfg.burn_in && window_total == tune_window {
            let rate = window_accepts as f64 / window_total as f64;
            if rate < 0.15 {
                chain.set_zeta(chain.zeta() / 2.0);
            } else if rate > 0.45 {
                chain.set_zeta(chain.zeta() * 2.0);
            }
            window_accepts = 0;
            window_total = 0;
        }

        trace.sweeps.push(chain.record(sweep, acc));
        if sweep % cfg.thin == 0 {
            trace.snapshots.push(WSnapshot {
                sweep,
                rho_star: chain.state.rho_star,
                w: chain.state.w.clone(),
            });
        }
    }
    trace.zeta_final = chain.zeta();
    trace.accepts.ell_factorization_failures = chain.factorization_failures();
    Ok(trace)
}
