//! Thinning-based simulation of covariate-driven Poisson point patterns.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::random_field::{CovariateField, FieldSampler};
use crate::rng::{child_seed, seed_rng};

/// A finite point pattern inside an observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    window: Window,
    points: Vec<f64>,
}

impl PointPattern {
    pub fn new(window: Window, points: Vec<f64>) -> Result<PointPattern> {
        let d = window.dim();
        if !points.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(
                "point buffer length must be a multiple of the window dimension".into(),
            ));
        }
        for p in points.chunks_exact(d) {
            if !window.contains(p) {
                return Err(Error::OutOfDomain { point: p.to_vec() });
            }
        }
        Ok(PointPattern { window, points })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.window.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        let d = self.window.dim();
        &self.points[k * d..(k + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.window.dim())
    }
}

/// n i.i.d. replicates of (point pattern, covariate field) on one window.
#[derive(Debug, Clone)]
pub struct Dataset {
    window: Window,
    dim_z: usize,
    pairs: Vec<(PointPattern, CovariateField)>,
}

impl Dataset {
    pub fn new(pairs: Vec<(PointPattern, CovariateField)>) -> Result<Dataset> {
        let Some((p0, f0)) = pairs.first() else {
            return Err(Error::InvalidArgument("dataset needs >= 1 replicate".into()));
        };
        let window = p0.window().clone();
        let dim_z = f0.dim_z();
        for (p, f) in &pairs {
            if p.window() != &window || f.window() != &window {
                return Err(Error::InvalidArgument(
                    "all replicates must share one window".into(),
                ));
            }
            if f.dim_z() != dim_z {
                return Err(Error::DimMismatch {
                    expected: dim_z,
                    got: f.dim_z(),
                });
            }
        }
        Ok(Dataset {
            window,
            dim_z,
            pairs,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim_z(&self) -> usize {
        self.dim_z
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, i: usize) -> &(PointPattern, CovariateField) {
        &self.pairs[i]
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(PointPattern, CovariateField)> {
        self.pairs.iter()
    }

    pub fn total_events(&self) -> usize {
        self.pairs.iter().map(|(p, _)| p.len()).sum()
    }
}

/// Lewis-Shedler thinning: dominate with a homogeneous process at rate
/// `rho_upper`, then retain each point with probability rho(Z(x)) / rho_upper.
pub fn simulate_cox<R: Rng, F: Fn(&[f64]) -> f64>(
    field: &CovariateField,
    rho: F,
    rho_upper: f64,
    rng: &mut R,
) -> Result<PointPattern> {
    if !(rho_upper > 0.0) || !rho_upper.is_finite() {
        return Err(Error::InvalidArgument("rho_upper must be positive and finite".into()));
    }
    let window = field.window().clone();
    let d = window.dim();
    let mean_dominating = rho_upper * window.volume();
    let k_dom = Poisson::new(mean_dominating)
        .map_err(|_| Error::InvalidArgument("invalid dominating mean".into()))?
        .sample(rng) as usize;
    let mut kept = Vec::new();
    let mut x = vec![0.0; d];
    let mut z = vec![0.0; field.dim_z()];
    for _ in 0..k_dom {
        for a in 0..d {
            x[a] = rng.gen_range(window.lower()[a]..window.upper()[a]);
        }
        field.evaluate_into(&x, &mut z)?;
        let r = rho(&z);
        if r > rho_upper * (1.0 + 1e-12) {
            return Err(Error::BoundViolation {
                value: r,
                bound: rho_upper,
            });
        }
        if rng.gen::<f64>() * rho_upper < r {
            kept.extend_from_slice(&x);
        }
    }
    PointPattern::new(window, kept)
}

/// n independent (field, pattern) replicates with per-replicate derived seeds.
pub fn simulate_dataset<F: Fn(&[f64]) -> f64>(
    n: usize,
    sampler: &FieldSampler,
    rho: F,
    rho_upper: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("dataset needs n >= 1".into()));
    }
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = seed_rng(child_seed(seed, i as u64));
        let field = sampler.sample(&mut rng)?;
        let pattern = simulate_cox(&field, &rho, rho_upper, &mut rng)?;
        pairs.push((pattern, field));
    }
    Dataset::new(pairs)
}
