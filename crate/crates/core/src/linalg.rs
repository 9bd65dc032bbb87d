//! Dense symmetric factorization with an escalating diagonal jitter.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Relative jitter escalation schedule: 0, then 1e-10 .. 1e-4 in decade steps,
/// each scaled by the largest diagonal entry.
const JITTER_STEPS: [f64; 8] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

/// Lower-triangular Cholesky factor of `A + jitter * I`.
#[derive(Debug, Clone)]
pub struct CholFactor {
    chol: Cholesky<f64, Dyn>,
    /// Absolute jitter added to the diagonal before factoring.
    pub jitter: f64,
    /// log det of the jittered matrix.
    pub log_det: f64,
}

impl CholFactor {
    /// Factor `a`, escalating the jitter until the decomposition succeeds.
    pub fn new(a: &DMatrix<f64>) -> Result<CholFactor> {
        let max_diag = a.diagonal().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max_diag.is_finite() || max_diag <= 0.0 {
            return Err(Error::NonFinite("matrix diagonal"));
        }
        for step in JITTER_STEPS {
            let jitter = step * max_diag;
            let mut m = a.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(m) {
                let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
                return Ok(CholFactor { chol, jitter, log_det });
            }
        }
        Err(Error::CholeskyFailure {
            max_jitter: JITTER_STEPS[JITTER_STEPS.len() - 1] * max_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// L * v for the lower factor (maps iid standard normals to the
    /// target covariance).
    pub fn l_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        let l = self.chol.l_dirty();
        let n = l.nrows();
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += l[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `out = L * input` on plain slices (no allocation).
    pub fn l_mul_slice(&self, input: &[f64], out: &mut [f64]) {
        let l = self.chol.l_dirty();
        let n = l.nrows();
        debug_assert!(input.len() == n && out.len() == n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += l[(i, j)] * input[j];
            }
            out[i] = acc;
        }
    }

    /// Quadratic form v^T A^{-1} v via a single triangular solve.
    pub fn inv_quad_form(&self, v: &DVector<f64>) -> f64 {
        let y = self
            .chol
            .l_dirty()
            .solve_lower_triangular(v)
            .expect("factor diagonal is positive");
        y.norm_squared()
    }
}
