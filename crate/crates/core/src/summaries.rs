//! Posterior summaries on evaluation grids, error metrics, and the d_Z
//! discrepancy between intensities.

use crate::error::{Error, Result};
use crate::geometry::{InterpolationBasis, QuadratureRule};
use crate::model::sigmoid;
use crate::random_field::CovariateField;
use crate::sampler::ChainTrace;
use crate::stats::quantile_sorted;
use crate::truth::TruthSpec;

/// Uniform inclusive evaluation grid on [0,1]^d (the endpoints belong to
/// the grid). Grid means approximate unit-cube integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct ZGrid {
    dim: usize,
    per_axis: Vec<usize>,
    points: Vec<f64>,
}

impl ZGrid {
    pub fn uniform(per_axis: &[usize]) -> Result<ZGrid> {
        let dim = per_axis.len();
        if dim == 0 || per_axis.iter().any(|&m| m < 2) {
            return Err(Error::InvalidArgument(
                "grid needs >= 2 points per axis".into(),
            ));
        }
        let total: usize = per_axis.iter().product();
        let mut points = Vec::with_capacity(total * dim);
        let mut index = vec![0usize; dim];
        for _ in 0..total {
            for (k, &m) in per_axis.iter().enumerate() {
                points.push(index[k] as f64 / (m - 1) as f64);
            }
            for k in (0..dim).rev() {
                index[k] += 1;
                if index[k] < per_axis[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        Ok(ZGrid {
            dim,
            per_axis: per_axis.to_vec(),
            points,
        })
    }

    /// Default resolutions: 400 points in 1-d, 60 per axis in 2-d, 16 in 3-d.
    pub fn default_for_dim(dim: usize) -> Result<ZGrid> {
        match dim {
            1 => ZGrid::uniform(&[400]),
            2 => ZGrid::uniform(&[60, 60]),
            3 => ZGrid::uniform(&[16, 16, 16]),
            _ => Err(Error::InvalidArgument(format!("unsupported dimension {dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn per_axis(&self) -> &[usize] {
        &self.per_axis
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn flat_points(&self) -> &[f64] {
        &self.points
    }

    /// Multilinear interpolation of grid values at z inside [0,1]^d.
    pub fn interpolate(&self, values: &[f64], z: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        if z.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        if z.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::OutOfDomain { point: z.to_vec() });
        }
        let mut cell = [0usize; 8];
        let mut frac = [0.0f64; 8];
        for (k, &m) in self.per_axis.iter().enumerate() {
            let t = z[k] * (m - 1) as f64;
            let c = (t.floor() as usize).min(m - 2);
            cell[k] = c;
            frac[k] = t - c as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut node = 0usize;
            for k in 0..self.dim {
                let hi = (corner >> k) & 1;
                w *= if hi == 1 { frac[k] } else { 1.0 - frac[k] };
                node = node * self.per_axis[k] + cell[k] + hi;
            }
            if w > 0.0 {
                acc += w * values[node];
            }
        }
        Ok(acc)
    }

    /// Grid mean, i.e. the grid-induced quadrature of `values` over the
    /// unit cube.
    pub fn mean_of(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Pointwise posterior summary of the intensity on a grid.
#[derive(Debug, Clone)]
pub struct IntensityEstimate {
    pub zgrid: ZGrid,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

fn post_burn_in_intensity_samples(
    trace: &ChainTrace,
    burn_in: usize,
    basis: &InterpolationBasis,
    zgrid: &ZGrid,
) -> Result<Vec<Vec<f64>>> {
    let snaps: Vec<_> = trace
        .snapshots
        .iter()
        .filter(|s| s.sweep > burn_in)
        .collect();
    if snaps.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let proj = basis.project(zgrid.flat_points())?;
    let mut samples = Vec::with_capacity(snaps.len());
    let mut buf = vec![0.0; zgrid.len()];
    for snap in snaps {
        proj.eval_all(&snap.w, &mut buf);
        samples.push(
            buf.iter()
                .map(|&wv| snap.rho_star * sigmoid(wv))
                .collect::<Vec<f64>>(),
        );
    }
    Ok(samples)
}

/// Pointwise average of the intensity over post-burn-in stored states.
pub fn posterior_mean(
    trace: &ChainTrace,
    burn_in: usize,
    basis: &InterpolationBasis,
    zgrid: &ZGrid,
) -> Result<Vec<f64>> {
    let samples = post_burn_in_intensity_samples(trace, burn_in, basis, zgrid)?;
    let m = samples.len() as f64;
    let mut mean = vec![0.0; zgrid.len()];
    for s in &samples {
        for (acc, v) in mean.iter_mut().zip(s) {
            *acc += v;
        }
    }
    for v in mean.iter_mut() {
        *v /= m;
    }
    Ok(mean)
}

/// Pointwise credible band via interpolated empirical quantiles at
/// (1 - level)/2 and (1 + level)/2.
pub fn credible_band(
    trace: &ChainTrace,
    burn_in: usize,
    basis: &InterpolationBasis,
    zgrid: &ZGrid,
    level: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::InvalidArgument("level must lie in [0, 1)".into()));
    }
    let samples = post_burn_in_intensity_samples(trace, burn_in, basis, zgrid)?;
    let mut lower = Vec::with_capacity(zgrid.len());
    let mut upper = Vec::with_capacity(zgrid.len());
    let mut column = vec![0.0; samples.len()];
    for g in 0..zgrid.len() {
        for (slot, s) in column.iter_mut().zip(&samples) {
            *slot = s[g];
        }
        column.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lower.push(quantile_sorted(&column, (1.0 - level) / 2.0));
        upper.push(quantile_sorted(&column, (1.0 + level) / 2.0));
    }
    Ok((lower, upper))
}

/// Assemble the posterior summary (mean plus band) in one pass.
pub fn intensity_estimate(
    trace: &ChainTrace,
    burn_in: usize,
    basis: &InterpolationBasis,
    zgrid: &ZGrid,
    level: f64,
) -> Result<IntensityEstimate> {
    let mean = posterior_mean(trace, burn_in, basis, zgrid)?;
    let (lower, upper) = credible_band(trace, burn_in, basis, zgrid, level)?;
    debug_assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u));
    Ok(IntensityEstimate {
        zgrid: zgrid.clone(),
        mean,
        lower,
        upper,
        level,
    })
}

/// L2 norm of a truth on the grid (grid mean of squares, unit volume).
pub fn l2_norm_of_truth(truth: &TruthSpec, zgrid: &ZGrid) -> Result<f64> {
    if truth.dim() != zgrid.dim() {
        return Err(Error::DimMismatch {
            expected: truth.dim(),
            got: zgrid.dim(),
        });
    }
    let mut acc = 0.0;
    for z in zgrid.points() {
        let v = truth.eval(z)?;
        acc += v * v;
    }
    Ok((acc / zgrid.len() as f64).sqrt())
}

/// Absolute and relative L2 estimation error of grid values against a truth.
pub fn l2_error(values: &[f64], truth: &TruthSpec, zgrid: &ZGrid) -> Result<(f64, f64)> {
    if truth.dim() != zgrid.dim() {
        return Err(Error::DimMismatch {
            expected: truth.dim(),
            got: zgrid.dim(),
        });
    }
    if values.len() != zgrid.len() {
        return Err(Error::DimMismatch {
            expected: zgrid.len(),
            got: values.len(),
        });
    }
    let mut acc = 0.0;
    let mut norm = 0.0;
    for (v, z) in values.iter().zip(zgrid.points()) {
        let t = truth.eval(z)?;
        acc += (v - t) * (v - t);
        norm += t * t;
    }
    let absolute = (acc / zgrid.len() as f64).sqrt();
    let relative = absolute / (norm / zgrid.len() as f64).sqrt();
    Ok((absolute, relative))
}

/// Evaluation mode of the d_Z discrepancy.
pub enum DzMode<'a> {
    /// Uniform stationary covariates: scaled L2 distance on [0,1]^d.
    Uniform { zgrid: &'a ZGrid, window_volume: f64 },
    /// Monte Carlo over supplied covariate-field draws.
    Empirical {
        fields: &'a [CovariateField],
        quadrature: &'a QuadratureRule,
    },
}

/// Root expected squared L2 distance between square-rooted spatial
/// intensities.
pub fn dz_distance<F1, F2>(rho1: F1, rho2: F2, mode: DzMode) -> Result<f64>
where
    F1: Fn(&[f64]) -> f64,
    F2: Fn(&[f64]) -> f64,
{
    let check = |v: f64| -> Result<f64> {
        if v < 0.0 {
            return Err(Error::InvalidArgument(
                "d_Z requires nonnegative intensities".into(),
            ));
        }
        Ok(v)
    };
    match mode {
        DzMode::Uniform { zgrid, window_volume } => {
            let mut acc = 0.0;
            for z in zgrid.points() {
                let a = check(rho1(z))?.sqrt();
                let b = check(rho2(z))?.sqrt();
                acc += (a - b) * (a - b);
            }
            Ok((window_volume * acc / zgrid.len() as f64).sqrt())
        }
        DzMode::Empirical { fields, quadrature } => {
            if fields.is_empty() {
                return Err(Error::InvalidArgument("empirical mode needs fields".into()));
            }
            let mut total = 0.0;
            let mut z = vec![0.0; fields[0].dim_z()];
            for field in fields {
                let mut acc = 0.0;
                for (node, wt) in quadrature.nodes().zip(quadrature.weights()) {
                    field.evaluate_into(node, &mut z)?;
                    let a = check(rho1(&z))?.sqrt();
                    let b = check(rho2(&z))?.sqrt();
                    acc += wt * (a - b) * (a - b);
                }
                total += acc;
            }
            Ok((total / fields.len() as f64).sqrt())
        }
    }
}

/// Compose a grid estimate with a covariate field: value at x equals the
/// (grid-interpolated) estimate at Z(x).
pub fn plugin_spatial_intensity(
    estimate_values: &[f64],
    zgrid: &ZGrid,
    field: &CovariateField,
    xpoints: &[f64],
) -> Result<Vec<f64>> {
    let d = field.window().dim();
    assert_eq!(xpoints.len() % d, 0);
    let mut out = Vec::with_capacity(xpoints.len() / d);
    let mut z = vec![0.0; field.dim_z()];
    for x in xpoints.chunks_exact(d) {
        field.evaluate_into(x, &mut z)?;
        out.push(zgrid.interpolate(estimate_values, &z)?);
    }
    Ok(out)
}
