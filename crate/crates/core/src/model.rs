//! Intensity parametrization rho = rho* sigma(w), ARD covariance over basis
//! nodes, hyperpriors, and latent-state bookkeeping.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::InterpolationBasis;
use crate::linalg::CholFactor;

/// Hyperparameters of the hierarchical prior. Gamma distributions use the
/// RATE parametrization throughout: Gamma(a, b) has mean a / b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub a_rho: f64,
    pub b_rho: f64,
    pub a_theta: f64,
    pub b_theta: f64,
    pub a_gamma: f64,
    pub b_gamma: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            a_rho: 1.0,
            b_rho: 2.0,
            a_theta: 2.0,
            b_theta: 2.0,
            a_gamma: 1.0,
            b_gamma: 1.0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.a_rho,
            self.b_rho,
            self.a_theta,
            self.b_theta,
            self.a_gamma,
            self.b_gamma,
        ];
        if all.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "hyperparameters must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Numerically stable sigmoid link.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log sigmoid(t) without intermediate underflow.
pub fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

/// ell_j = gamma_j^(theta_j / d).
pub fn lengthscale_from(gamma: f64, theta: f64, d: usize) -> f64 {
    gamma.powf(theta / d as f64)
}

/// Per-coordinate squared distances between basis nodes; the fixed geometry
/// behind every ARD covariance evaluation.
#[derive(Debug, Clone)]
pub struct NodeDistances {
    v: usize,
    dim: usize,
    /// d matrices of size v*v, row-major
    d2: Vec<Vec<f64>>,
}

impl NodeDistances {
    pub fn from_basis(basis: &InterpolationBasis) -> NodeDistances {
        let v = basis.len();
        let dim = basis.dim();
        let mut d2 = vec![vec![0.0; v * v]; dim];
        for i in 0..v {
            let zi = basis.node(i);
            for j in 0..v {
                let zj = basis.node(j);
                for k in 0..dim {
                    let diff = zi[k] - zj[k];
                    d2[k][i * v + j] = diff * diff;
                }
            }
        }
        NodeDistances { v, dim, d2 }
    }

    pub fn len(&self) -> usize {
        self.v
    }

    pub fn is_empty(&self) -> bool {
        self.v == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// ARD covariance (C)_{v,v'} = exp(-sum_j ell_j (z_{v,j} - z_{v',j})^2).
    pub fn covariance(&self, ell: &[f64]) -> DMatrix<f64> {
        assert_eq!(ell.len(), self.dim);
        let v = self.v;
        let mut m = DMatrix::zeros(v, v);
        for i in 0..v {
            for j in 0..v {
                let mut acc = 0.0;
                for k in 0..self.dim {
                    acc += ell[k] * self.d2[k][i * v + j];
                }
                m[(i, j)] = (-acc).exp();
            }
        }
        m
    }

    /// Covariance plus its jittered Cholesky factor.
    pub fn factor(&self, ell: &[f64]) -> Result<CholFactor> {
        CholFactor::new(&self.covariance(ell))
    }
}

/// Full parameter vector of the sampler: (rho*, theta, ell, w) plus the
/// cached factor of C_ell. The factor is refreshed whenever ell changes.
#[derive(Debug, Clone)]
pub struct LatentState {
    pub rho_star: f64,
    pub theta: Vec<f64>,
    pub ell: Vec<f64>,
    pub w: Vec<f64>,
    factor: CholFactor,
}

impl LatentState {
    pub fn new(
        rho_star: f64,
        theta: Vec<f64>,
        ell: Vec<f64>,
        w: Vec<f64>,
        dists: &NodeDistances,
    ) -> Result<LatentState> {
        if theta.len() != dists.dim() || ell.len() != dists.dim() {
            return Err(Error::DimMismatch {
                expected: dists.dim(),
                got: theta.len().max(ell.len()),
            });
        }
        if w.len() != dists.len() {
            return Err(Error::DimMismatch {
                expected: dists.len(),
                got: w.len(),
            });
        }
        let factor = dists.factor(&ell)?;
        Ok(LatentState {
            rho_star,
            theta,
            ell,
            w,
            factor,
        })
    }

    pub fn factor(&self) -> &CholFactor {
        &self.factor
    }

    /// Update one length-scale together with its already-computed factor.
    pub fn set_ell(&mut self, j: usize, value: f64, factor: CholFactor) {
        self.ell[j] = value;
        self.factor = factor;
    }

    /// rho* sigma(w(z)); in (0, rho*) up to sigmoid saturation.
    pub fn intensity_at(&self, basis: &InterpolationBasis, z: &[f64]) -> Result<f64> {
        Ok(self.rho_star * sigmoid(basis.evaluate(&self.w, z)?))
    }

    /// -1/2 w^T C^{-1} w - 1/2 log det C under the cached factor.
    pub fn log_prior_w(&self) -> f64 {
        log_gaussian_prior(&self.w, &self.factor)
    }
}

/// Centered Gaussian log-density of w under the factored covariance,
/// dropping dimension constants (consistent across length-scale values).
pub fn log_gaussian_prior(w: &[f64], factor: &CholFactor) -> f64 {
    let v = DVector::from_column_slice(w);
    -0.5 * factor.inv_quad_form(&v) - 0.5 * factor.log_det
}

/// Draw (rho*, theta, ell, w) from the hierarchical prior.
pub fn sample_prior<R: Rng>(
    hyper: &HyperParams,
    dists: &NodeDistances,
    rng: &mut R,
) -> Result<LatentState> {
    hyper.validate()?;
    let d = dists.dim();
    let rho_star = Gamma::new(hyper.a_rho, 1.0 / hyper.b_rho)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .sample(rng);
    let beta = Beta::new(hyper.a_theta, hyper.b_theta)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let gamma_dist = Gamma::new(hyper.a_gamma, 1.0 / hyper.b_gamma)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut theta = Vec::with_capacity(d);
    let mut ell = Vec::with_capacity(d);
    for _ in 0..d {
        let th: f64 = beta.sample(rng);
        let ga: f64 = gamma_dist.sample(rng);
        theta.push(th);
        ell.push(lengthscale_from(ga, th, d));
    }
    let factor = dists.factor(&ell)?;
    let eps: Vec<f64> = (0..dists.len()).map(|_| rng.sample(StandardNormal)).collect();
    let mut w = vec![0.0; dists.len()];
    factor.l_mul_slice(&eps, &mut w);
    Ok(LatentState {
        rho_star,
        theta,
        ell,
        w,
        factor,
    })
}
