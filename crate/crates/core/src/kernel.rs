//! Frequentist comparator: per-replicate ratio-form kernel intensity
//! estimators with Silverman bandwidths, and their (plain or weighted)
//! average over replicates.

use crate::error::{Error, Result};
use crate::geometry::QuadratureRule;
use crate::random_field::CovariateField;
use crate::simulate::{Dataset, PointPattern};
use crate::stats::{iqr, std_dev};
use crate::summaries::ZGrid;

/// Averaging variant for the dataset-level estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    /// Unweighted mean of the per-replicate estimates.
    PlainAverage,
    /// Event-count-weighted mean over replicates whose empirical covariate
    /// support (bandwidth-inflated hull per coordinate) contains z.
    WeightedSupportRestricted,
}

/// Kernel intensity estimate on a covariate grid; `supported[i]` is false
/// where the occupation density fell below the guard floor everywhere.
#[derive(Debug, Clone)]
pub struct KernelEstimate {
    pub zgrid: ZGrid,
    pub values: Vec<f64>,
    pub supported: Vec<bool>,
    pub variant: KernelVariant,
}

/// Silverman's rule-of-thumb in robust form:
/// 0.9 min(sd, IQR/1.34) m^(-1/5).
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Degenerate("bandwidth needs >= 2 samples".into()));
    }
    let spread = std_dev(samples).min(iqr(samples) / 1.34);
    if !(spread > 0.0) {
        return Err(Error::Degenerate("zero spread in covariate sample".into()));
    }
    Ok(0.9 * spread * (samples.len() as f64).powf(-0.2))
}

/// Product Gaussian kernel with one bandwidth per coordinate.
fn product_kernel(u: &[f64], bandwidth: &[f64]) -> f64 {
    let mut acc = 1.0;
    for (ui, h) in u.iter().zip(bandwidth) {
        let t = ui / h;
        acc *= (-0.5 * t * t).exp() / (h * (2.0 * std::f64::consts::PI).sqrt());
    }
    acc
}

/// Per-coordinate Silverman bandwidths from the covariate values at the
/// quadrature nodes (the spatial occupation sample of the field).
pub fn occupation_bandwidth(field: &CovariateField, quadrature: &QuadratureRule) -> Result<Vec<f64>> {
    let d = field.dim_z();
    let mut per_coord = vec![Vec::with_capacity(quadrature.len()); d];
    let mut z = vec![0.0; d];
    for node in quadrature.nodes() {
        field.evaluate_into(node, &mut z)?;
        for (k, &v) in z.iter().enumerate() {
            per_coord[k].push(v);
        }
    }
    per_coord.iter().map(|s| silverman_bandwidth(s)).collect()
}

/// Per-coordinate Silverman bandwidths from the covariate values at the
/// replicate's own events. Returns None when the event sample is too small
/// or degenerate to carry a bandwidth (fewer than two events, zero spread).
pub fn event_bandwidth(pattern: &PointPattern, field: &CovariateField) -> Result<Option<Vec<f64>>> {
    if pattern.len() < 2 {
        return Ok(None);
    }
    let d = field.dim_z();
    let mut per_coord = vec![Vec::with_capacity(pattern.len()); d];
    let mut z = vec![0.0; d];
    for x in pattern.points() {
        field.evaluate_into(x, &mut z)?;
        for (k, &v) in z.iter().enumerate() {
            per_coord[k].push(v);
        }
    }
    let mut out = Vec::with_capacity(d);
    for coord in &per_coord {
        match silverman_bandwidth(coord) {
            Ok(h) => out.push(h),
            Err(Error::Degenerate(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

/// Kernel-smoothed occupation density of covariate values over the window:
/// g(z) = sum_q weight_q kappa_h(Z(node_q) - z).
pub fn spatial_cdf_density(
    field: &CovariateField,
    quadrature: &QuadratureRule,
    bandwidth: &[f64],
    z: &[f64],
) -> Result<f64> {
    if bandwidth.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let d = field.dim_z();
    let mut zq = vec![0.0; d];
    let mut u = vec![0.0; d];
    let mut acc = 0.0;
    for (node, wt) in quadrature.nodes().zip(quadrature.weights()) {
        field.evaluate_into(node, &mut zq)?;
        for k in 0..d {
            u[k] = zq[k] - z[k];
        }
        acc += wt * product_kernel(&u, bandwidth);
    }
    Ok(acc)
}

/// Guard floor under which the ratio estimator is marked unsupported
/// instead of exploding.
fn g_floor(window_volume: f64) -> f64 {
    1e-3 * window_volume
}

/// Ratio-form estimate for one replicate on the grid:
/// rho_hat(z) = sum_k kappa_h(Z(X_k) - z) / g(z).
///
/// Returns (values, supported); an empty pattern yields identically zero.
pub fn kernel_estimate_single(
    pattern: &PointPattern,
    field: &CovariateField,
    quadrature: &QuadratureRule,
    bandwidth: &[f64],
    zgrid: &ZGrid,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let d = field.dim_z();
    if zgrid.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: zgrid.dim(),
        });
    }
    let floor = g_floor(field.window().volume());
    // covariate values at events
    let mut event_z = Vec::with_capacity(pattern.len() * d);
    let mut buf = vec![0.0; d];
    for x in pattern.points() {
        field.evaluate_into(x, &mut buf)?;
        event_z.extend_from_slice(&buf);
    }
    let mut values = Vec::with_capacity(zgrid.len());
    let mut supported = Vec::with_capacity(zgrid.len());
    let mut u = vec![0.0; d];
    for z in zgrid.points() {
        let g = spatial_cdf_density(field, quadrature, bandwidth, z)?;
        if g < floor {
            values.push(0.0);
            supported.push(false);
            continue;
        }
        let mut num = 0.0;
        for ze in event_z.chunks_exact(d) {
            for k in 0..d {
                u[k] = ze[k] - z[k];
            }
            num += product_kernel(&u, bandwidth);
        }
        values.push(num / g);
        supported.push(true);
    }
    Ok((values, supported))
}

/// Bandwidth-inflated per-coordinate hull of the event covariate values.
fn empirical_support(event_z: &[f64], d: usize, bandwidth: &[f64]) -> Option<Vec<(f64, f64)>> {
    if event_z.is_empty() {
        return None;
    }
    let mut hull = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for ze in event_z.chunks_exact(d) {
        for k in 0..d {
            hull[k].0 = hull[k].0.min(ze[k]);
            hull[k].1 = hull[k].1.max(ze[k]);
        }
    }
    Some(
        hull.iter()
            .zip(bandwidth)
            .map(|(&(lo, hi), &h)| (lo - h, hi + h))
            .collect(),
    )
}

/// Dataset-level kernel estimate: average of per-replicate ratio-form
/// estimators. Each replicate smooths with the Silverman bandwidth of its
/// own event covariate values (so the bandwidth tracks the per-replicate
/// event count, not the number of replicates), falling back to the
/// occupation-sample bandwidth when fewer than two events are available.
pub fn kernel_estimate_average(
    dataset: &Dataset,
    quadrature: &QuadratureRule,
    zgrid: &ZGrid,
    variant: KernelVariant,
) -> Result<KernelEstimate> {
    let d = dataset.dim_z();
    if d > 2 {
        return Err(Error::InvalidArgument(
            "kernel baseline supports at most two covariates".into(),
        ));
    }
    let m = zgrid.len();
    let mut weight_sum = vec![0.0; m];
    let mut value_sum = vec![0.0; m];
    for (pattern, field) in dataset.pairs() {
        let bandwidth = match event_bandwidth(pattern, field)? {
            Some(h) => h,
            None => occupation_bandwidth(field, quadrature)?,
        };
        let (vals, supported) = kernel_estimate_single(pattern, field, quadrature, &bandwidth, zgrid)?;
        // covariates at events for the support hull
        let mut event_z = Vec::with_capacity(pattern.len() * d);
        let mut buf = vec![0.0; d];
        for x in pattern.points() {
            field.evaluate_into(x, &mut buf)?;
            event_z.extend_from_slice(&buf);
        }
        let hull = empirical_support(&event_z, d, &bandwidth);
        for (i, z) in zgrid.points().enumerate() {
            let in_support = match variant {
                KernelVariant::PlainAverage => supported[i],
                KernelVariant::WeightedSupportRestricted => {
                    supported[i]
                        && hull.as_ref().is_some_and(|h| {
                            z.iter().zip(h).all(|(zi, &(lo, hi))| *zi >= lo && *zi <= hi)
                        })
                }
            };
            if in_support {
                let wt = match variant {
                    KernelVariant::PlainAverage => 1.0,
                    KernelVariant::WeightedSupportRestricted => pattern.len() as f64,
                };
                weight_sum[i] += wt;
                value_sum[i] += wt * vals[i];
            }
        }
    }
    let mut values = vec![0.0; m];
    let mut supported = vec![false; m];
    for i in 0..m {
        if weight_sum[i] > 0.0 {
            values[i] = value_sum[i] / weight_sum[i];
            supported[i] = true;
        }
    }
    Ok(KernelEstimate {
        zgrid: zgrid.clone(),
        values,
        supported,
        variant,
    })
}
