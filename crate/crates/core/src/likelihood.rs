//! Log-likelihood of a latent state given the dataset, with covariates at
//! quadrature nodes and event locations precomputed once.

use crate::error::Result;
use crate::geometry::{BasisProjection, InterpolationBasis, QuadratureRule};
use crate::model::{log_sigmoid, sigmoid, LatentState};
use crate::simulate::Dataset;

/// Frozen per-dataset evaluation structure: covariate values at every
/// quadrature node of every replicate and at every event, together with the
/// sparse interpolation rows of a fixed basis at those covariate points.
pub struct LikelihoodContext {
    n: usize,
    quad_weights: Vec<f64>,
    volume: f64,
    dim_z: usize,
    /// covariates at quadrature nodes, replicate-major: (i * Q + q) * d
    node_cov: Vec<f64>,
    /// covariates at events, replicate-concatenated
    event_cov: Vec<f64>,
    event_counts: Vec<usize>,
    node_proj: BasisProjection,
    event_proj: BasisProjection,
}

impl LikelihoodContext {
    pub fn new(
        dataset: &Dataset,
        quadrature: &QuadratureRule,
        basis: &InterpolationBasis,
    ) -> Result<LikelihoodContext> {
        let n = dataset.len();
        let d = dataset.dim_z();
        let q = quadrature.len();
        let mut node_cov = Vec::with_capacity(n * q * d);
        let mut event_cov = Vec::new();
        let mut event_counts = Vec::with_capacity(n);
        let mut z = vec![0.0; d];
        for (pattern, field) in dataset.pairs() {
            for node in quadrature.nodes() {
                field.evaluate_into(node, &mut z)?;
                node_cov.extend_from_slice(&z);
            }
            for x in pattern.points() {
                field.evaluate_into(x, &mut z)?;
                event_cov.extend_from_slice(&z);
            }
            event_counts.push(pattern.len());
        }
        let node_proj = basis.project(&node_cov)?;
        let event_proj = basis.project(&event_cov)?;
        Ok(LikelihoodContext {
            n,
            quad_weights: quadrature.weights().to_vec(),
            volume: dataset.window().volume(),
            dim_z: d,
            node_cov,
            event_cov,
            event_counts,
            node_proj,
            event_proj,
        })
    }

    pub fn replicates(&self) -> usize {
        self.n
    }

    pub fn dim_z(&self) -> usize {
        self.dim_z
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn total_events(&self) -> usize {
        self.event_counts.iter().sum()
    }

    pub fn event_counts(&self) -> &[usize] {
        &self.event_counts
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Covariate vector of quadrature node q within replicate i.
    pub fn node_covariate(&self, i: usize, q: usize) -> &[f64] {
        let idx = i * self.quad_weights.len() + q;
        &self.node_cov[idx * self.dim_z..(idx + 1) * self.dim_z]
    }

    /// Covariate vector of the k-th event in dataset order.
    pub fn event_covariate(&self, k: usize) -> &[f64] {
        &self.event_cov[k * self.dim_z..(k + 1) * self.dim_z]
    }

    /// Quadrature value of sum_i sigma(w(Z^i(.))) over the window; the
    /// integral shared by the gamma block and the likelihood.
    pub fn integral_of_sigma(&self, w: &[f64]) -> f64 {
        let q = self.quad_weights.len();
        let mut acc = 0.0;
        for i in 0..self.n {
            let base = i * q;
            for (qi, wt) in self.quad_weights.iter().enumerate() {
                acc += wt * sigmoid(self.node_proj.eval(w, base + qi));
            }
        }
        acc
    }

    /// sum over events of log sigma(w(Z(X_k))).
    pub fn event_log_sigma_sum(&self, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.event_proj.len() {
            acc += log_sigmoid(self.event_proj.eval(w, k));
        }
        acc
    }

    /// Joint log-likelihood of the dataset under `state`:
    /// sum_i [ sum_k log(rho* sigma(w(Z(X_k)))) - integral (rho(Z(x)) - 1) dx ].
    ///
    /// An intensity of exactly zero at an observed event (possible only at
    /// sigmoid underflow) yields -infinity rather than a panic.
    pub fn log_likelihood(&self, state: &LatentState) -> f64 {
        let sum_k = self.total_events() as f64;
        if state.rho_star <= 0.0 {
            return f64::NEG_INFINITY;
        }
        sum_k * state.rho_star.ln() + self.event_log_sigma_sum(&state.w)
            - state.rho_star * self.integral_of_sigma(&state.w)
            + self.n as f64 * self.volume
    }

    /// log-likelihood assembled from already-computed caches; must agree
    /// with `log_likelihood` to the last few ulps.
    pub fn log_likelihood_from_parts(
        &self,
        rho_star: f64,
        event_log_sigma: f64,
        sigma_integral: f64,
    ) -> f64 {
        self.total_events() as f64 * rho_star.ln() + event_log_sigma
            - rho_star * sigma_integral
            + self.n as f64 * self.volume
    }
}
