//! Simulation of square-exponential Gaussian random fields on the window and
//! their transformation into [0,1]-valued covariate fields.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::linalg::CholFactor;
use crate::rng::seed_rng;
use crate::special::normal_cdf;

/// Covariate pre-processing map onto [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preprocess {
    /// Standard normal CDF of the (standardized) values.
    NormalCdf,
    /// Pooled empirical CDF (rank transform).
    EmpiricalCdf,
}

/// Dense gram matrix of the squared-exponential kernel
/// exp(-|x - x'|^2 / lengthscale) over a point list.
pub fn se_gram(points: &[f64], dim: usize, lengthscale: f64) -> DMatrix<f64> {
    assert!(lengthscale > 0.0);
    let m = points.len() / dim;
    DMatrix::from_fn(m, m, |i, j| {
        let a = &points[i * dim..(i + 1) * dim];
        let b = &points[j * dim..(j + 1) * dim];
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (-d2 / lengthscale).exp()
    })
}

/// Inclusive uniform grid coordinates along one window axis.
fn axis_coords(lo: f64, hi: f64, res: usize) -> Vec<f64> {
    let h = (hi - lo) / (res - 1) as f64;
    (0..res).map(|i| lo + i as f64 * h).collect()
}

/// Sampler for one scalar squared-exponential field on a regular grid.
///
/// The SE kernel factorizes over axes on a tensor grid, so one Cholesky
/// factor per axis reproduces the full-grid covariance exactly at a tiny
/// fraction of the dense factorization cost.
pub struct SquaredExpSampler {
    resolution: usize,
    dim: usize,
    axis_factors: Vec<CholFactor>,
}

impl SquaredExpSampler {
    pub fn new(window: &Window, resolution: usize, lengthscale: f64) -> Result<SquaredExpSampler> {
        if resolution < 2 {
            return Err(Error::InvalidArgument("field grid needs >= 2 nodes per axis".into()));
        }
        if !(lengthscale > 0.0) {
            return Err(Error::InvalidArgument("lengthscale must be positive".into()));
        }
        let mut axis_factors = Vec::with_capacity(window.dim());
        for a in 0..window.dim() {
            let coords = axis_coords(window.lower()[a], window.upper()[a], resolution);
            let gram = se_gram(&coords, 1, lengthscale);
            axis_factors.push(CholFactor::new(&gram)?);
        }
        Ok(SquaredExpSampler {
            resolution,
            dim: window.dim(),
            axis_factors,
        })
    }

    pub fn grid_len(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    /// One centered unit-variance realization on the grid, row-major with
    /// the last axis fastest.
    pub fn sample_raw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let total = self.grid_len();
        let mut data: Vec<f64> = (0..total).map(|_| rng.sample(StandardNormal)).collect();
        let sizes = vec![self.resolution; self.dim];
        let mut line_in = vec![0.0; self.resolution];
        let mut line_out = vec![0.0; self.resolution];
        for (axis, factor) in self.axis_factors.iter().enumerate() {
            let n = sizes[axis];
            let stride: usize = sizes[axis + 1..].iter().product();
            let outer: usize = sizes[..axis].iter().product();
            for o in 0..outer {
                for i in 0..stride {
                    let base = o * n * stride + i;
                    for j in 0..n {
                        line_in[j] = data[base + j * stride];
                    }
                    factor.l_mul_slice(&line_in, &mut line_out);
                    for j in 0..n {
                        data[base + j * stride] = line_out[j];
                    }
                }
            }
        }
        data
    }
}

/// Draw one raw squared-exponential field realization; deterministic in `seed`.
pub fn sample_se_field(
    window: &Window,
    resolution: usize,
    lengthscale: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let sampler = SquaredExpSampler::new(window, resolution, lengthscale)?;
    Ok(sampler.sample_raw(&mut seed_rng(seed)))
}

/// Componentwise standard normal CDF; strictly monotone, output in (0,1).
pub fn gaussianize(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("raw field values"));
    }
    Ok(raw.iter().map(|&v| normal_cdf(v)).collect())
}

/// Pooled empirical-CDF transform: value v maps to #{u <= v} / (m + 1).
pub fn gaussianize_empirical(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("raw field values"));
    }
    let mut sorted = raw.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len() as f64;
    Ok(raw
        .iter()
        .map(|&v| sorted.partition_point(|&u| u <= v) as f64 / (m + 1.0))
        .collect())
}

/// A d-variate covariate field stored on a regular window grid with
/// multilinear interpolation between grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateField {
    window: Window,
    /// grid nodes per window axis (inclusive of both endpoints)
    res: Vec<usize>,
    dim_z: usize,
    /// node-major, the d components of one node contiguous
    values: Vec<f64>,
}

impl CovariateField {
    /// Assemble a field from per-component grids (each row-major over the
    /// window grid with the last axis fastest, values already in [0,1]).
    pub fn from_component_grids(
        window: Window,
        res: Vec<usize>,
        components: &[Vec<f64>],
    ) -> Result<CovariateField> {
        let dim_z = components.len();
        if dim_z == 0 {
            return Err(Error::InvalidArgument("field needs >= 1 component".into()));
        }
        if res.len() != window.dim() || res.iter().any(|&r| r < 2) {
            return Err(Error::InvalidArgument(
                "field grid needs >= 2 nodes along every window axis".into(),
            ));
        }
        let total: usize = res.iter().product();
        for comp in components {
            if comp.len() != total {
                return Err(Error::DimMismatch {
                    expected: total,
                    got: comp.len(),
                });
            }
            if comp.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidArgument(
                    "covariate values must lie in [0,1]".into(),
                ));
            }
        }
        let mut values = Vec::with_capacity(total * dim_z);
        for node in 0..total {
            for comp in components {
                values.push(comp[node]);
            }
        }
        Ok(CovariateField {
            window,
            res,
            dim_z,
            values,
        })
    }

    /// Square-grid convenience constructor.
    pub fn from_square_grids(
        window: Window,
        resolution: usize,
        components: &[Vec<f64>],
    ) -> Result<CovariateField> {
        let res = vec![resolution; window.dim()];
        CovariateField::from_component_grids(window, res, components)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim_z(&self) -> usize {
        self.dim_z
    }

    pub fn resolution(&self) -> &[usize] {
        &self.res
    }

    pub fn grid_len(&self) -> usize {
        self.res.iter().product()
    }

    /// Stored value vector at a grid node (row-major node index).
    pub fn node_values(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim_z..(node + 1) * self.dim_z]
    }

    /// Grid coordinates of a node.
    pub fn node_coords(&self, node: usize) -> Vec<f64> {
        let d = self.window.dim();
        let mut out = vec![0.0; d];
        let mut rem = node;
        for a in (0..d).rev() {
            let idx = rem % self.res[a];
            rem /= self.res[a];
            let h = (self.window.upper()[a] - self.window.lower()[a]) / (self.res[a] - 1) as f64;
            out[a] = self.window.lower()[a] + idx as f64 * h;
        }
        out
    }

    /// Multilinear interpolation of the stored values at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim_z];
        self.evaluate_into(x, &mut out)?;
        Ok(out)
    }

    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.window.dim();
        if x.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: x.len(),
            });
        }
        if !self.window.contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        debug_assert_eq!(out.len(), self.dim_z);
        let mut cell = [0usize; 8];
        let mut frac = [0.0f64; 8];
        for a in 0..d {
            let n = self.res[a];
            let h = (self.window.upper()[a] - self.window.lower()[a]) / (n - 1) as f64;
            let t = (x[a] - self.window.lower()[a]) / h;
            let c = (t.floor() as usize).min(n - 2);
            cell[a] = c;
            frac[a] = t - c as f64;
        }
        out.fill(0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut node = 0usize;
            for a in 0..d {
                let hi = (corner >> a) & 1;
                w *= if hi == 1 { frac[a] } else { 1.0 - frac[a] };
                node = node * self.res[a] + cell[a] + hi;
            }
            if w == 0.0 {
                continue;
            }
            let vals = self.node_values(node);
            for j in 0..self.dim_z {
                out[j] += w * vals[j];
            }
        }
        Ok(())
    }
}

/// Samples complete covariate fields: one independent squared-exponential
/// component per entry of `lengthscales`, pre-processed onto [0,1].
pub struct FieldSampler {
    window: Window,
    resolution: usize,
    samplers: Vec<SquaredExpSampler>,
    preprocess: Preprocess,
}

impl FieldSampler {
    pub fn new(
        window: Window,
        resolution: usize,
        lengthscales: &[f64],
        preprocess: Preprocess,
    ) -> Result<FieldSampler> {
        let samplers = lengthscales
            .iter()
            .map(|&ls| SquaredExpSampler::new(&window, resolution, ls))
            .collect::<Result<Vec<_>>>()?;
        if samplers.is_empty() {
            return Err(Error::InvalidArgument("field needs >= 1 component".into()));
        }
        Ok(FieldSampler {
            window,
            resolution,
            samplers,
            preprocess,
        })
    }

    pub fn dim_z(&self) -> usize {
        self.samplers.len()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<CovariateField> {
        let comps = self
            .samplers
            .iter()
            .map(|s| {
                let raw = s.sample_raw(rng);
                match self.preprocess {
                    Preprocess::NormalCdf => gaussianize(&raw),
                    Preprocess::EmpiricalCdf => gaussianize_empirical(&raw),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        CovariateField::from_square_grids(self.window.clone(), self.resolution, &comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance};

    #[test]
    fn gram_is_symmetric_unit_diagonal() {
        let pts = [0.0, 0.3, 0.55, 0.9];
        let g = se_gram(&pts, 1, 0.2);
        for i in 0..4 {
            assert_eq!(g[(i, i)], 1.0);
            for j in 0..4 {
                assert_eq!(g[(i, j)], g[(j, i)]);
            }
        }
        assert!((g[(0, 1)] - (-0.09f64 / 0.2).exp()).abs() < 1e-15);
    }

    #[test]
    fn tensor_sampler_matches_dense_covariance() {
        // verify per-axis factorization against the dense gram on a small grid
        let w = Window::centered_unit_square();
        let res = 5;
        let sampler = SquaredExpSampler::new(&w, res, 0.3).unwrap();
        let mut rng = seed_rng(99);
        let m = 20_000;
        let total = res * res;
        let mut sums = vec![0.0; total];
        let mut cross = vec![0.0; total]; // covariance with node 0
        let mut draws0 = Vec::with_capacity(m);
        for _ in 0..m {
            let x = sampler.sample_raw(&mut rng);
            draws0.push(x[0]);
            for k in 0..total {
                sums[k] += x[k];
                cross[k] += x[0] * x[k];
            }
        }
        // coordinates in the same row-major order as the sampler output
        let mut pts = Vec::new();
        for i in 0..res {
            for j in 0..res {
                pts.push(-0.5 + i as f64 * 0.25);
                pts.push(-0.5 + j as f64 * 0.25);
            }
        }
        let gram = se_gram(&pts, 2, 0.3);
        for k in 0..total {
            let emp = cross[k] / m as f64 - (sums[0] / m as f64) * (sums[k] / m as f64);
            assert!(
                (emp - gram[(0, k)]).abs() < 0.03,
                "cov({k}) = {emp}, want {}",
                gram[(0, k)]
            );
        }
        let v = variance(&draws0);
        assert!((v - 1.0).abs() < 0.05, "marginal variance {v}");
    }

    #[test]
    fn node_marginals_are_standard_normal() {
        let w = Window::new(vec![0.0], vec![1.0]).unwrap();
        let sampler = SquaredExpSampler::new(&w, 21, 0.005).unwrap();
        let mut rng = seed_rng(4);
        let m = 10_000;
        let draws: Vec<f64> = (0..m).map(|_| sampler.sample_raw(&mut rng)[7]).collect();
        assert!(mean(&draws).abs() < 3.0 / 100.0);
        assert!((variance(&draws) - 1.0).abs() < 0.05);
    }

    #[test]
    fn huge_lengthscale_gives_constant_field() {
        let w = Window::centered_unit_square();
        let field = sample_se_field(&w, 11, 1e6, 123).unwrap();
        let m = mean(&field);
        let v = field.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / field.len() as f64;
        assert!(v < 0.01, "grid variance {v}");
    }

    #[test]
    fn equal_seeds_are_bit_identical() {
        let w = Window::centered_unit_square();
        let a = sample_se_field(&w, 17, 0.005, 42).unwrap();
        let b = sample_se_field(&w, 17, 0.005, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_se_field(&w, 17, 0.005, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussianize_reference_values() {
        let out = gaussianize(&[0.0, 1.959964]).unwrap();
        assert!((out[0] - 0.5).abs() < 1e-15);
        assert!((out[1] - 0.975).abs() < 1e-6);
        assert!(gaussianize(&[f64::NAN]).is_err());
    }

    #[test]
    fn gaussianize_is_monotone_and_bounded() {
        let mut rng = seed_rng(8);
        use rand::Rng;
        let raw: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-8.0..8.0)).collect();
        let out = gaussianize(&raw).unwrap();
        assert!(out.iter().all(|&v| v > 0.0 && v < 1.0));
        for i in 1..raw.len() {
            if raw[i - 1] < raw[i] {
                assert!(out[i - 1] < out[i]);
            }
        }
    }

    #[test]
    fn empirical_cdf_transform_is_in_open_unit_interval() {
        let raw = [3.0, -1.0, 2.0, 2.0, 0.5];
        let out = gaussianize_empirical(&raw).unwrap();
        assert!(out.iter().all(|&v| v > 0.0 && v < 1.0));
        // equal inputs map to equal outputs; order preserved
        assert_eq!(out[2], out[3]);
        assert!(out[1] < out[4] && out[4] < out[2] && out[2] < out[0]);
    }

    #[test]
    fn field_evaluation_is_exact_at_nodes_and_linear_between() {
        let w = Window::new(vec![0.0], vec![1.0]).unwrap();
        let comp = vec![0.2, 0.6, 0.3];
        let f = CovariateField::from_square_grids(w, 3, std::slice::from_ref(&comp)).unwrap();
        for (node, &v) in comp.iter().enumerate() {
            let x = f.node_coords(node);
            assert_eq!(f.evaluate(&x).unwrap()[0], v);
        }
        // midpoint of nodes 0 and 1 (spacing 0.5)
        assert!((f.evaluate(&[0.25]).unwrap()[0] - 0.4).abs() < 1e-15);
        assert!(f.evaluate(&[1.5]).is_err());
    }

    #[test]
    fn constant_field_is_constant_everywhere() {
        let w = Window::centered_unit_square();
        let comp = vec![0.77; 16];
        let f = CovariateField::from_square_grids(w, 4, &[comp]).unwrap();
        for x in [[-0.5, -0.5], [0.13, -0.41], [0.5, 0.5], [0.0, 0.0]] {
            assert!((f.evaluate(&x).unwrap()[0] - 0.77).abs() < 1e-15);
        }
    }

    #[test]
    fn field_sampler_produces_multivariate_fields() {
        let w = Window::centered_unit_square();
        let fs = FieldSampler::new(w, 13, &[0.005, 0.05], Preprocess::NormalCdf).unwrap();
        let f = fs.sample(&mut seed_rng(1)).unwrap();
        assert_eq!(f.dim_z(), 2);
        let z = f.evaluate(&[0.1, 0.2]).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
