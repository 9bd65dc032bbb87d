//! Observation windows, quadrature over the window, and interpolation bases
//! over the covariate space [0,1]^d.

use crate::error::{Error, Result};

/// Axis-aligned compact observation window in R^D.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Window {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Window> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidArgument(
                "window bounds must be non-empty and of equal length".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "window requires lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Window { lower, upper })
    }

    /// Centered unit square [-1/2, 1/2]^2.
    pub fn centered_unit_square() -> Window {
        Window::new(vec![-0.5, -0.5], vec![0.5, 0.5]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
    }
}

/// Midpoint quadrature rule on a uniform cell partition of a window.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Assemble a custom rule from explicit nodes and positive weights.
    pub fn from_parts(dim: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Result<QuadratureRule> {
        if dim == 0 || nodes.len() != weights.len() * dim {
            return Err(Error::InvalidArgument(
                "node buffer must hold dim coordinates per weight".into(),
            ));
        }
        if weights.iter().any(|w| !(w > &0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        Ok(QuadratureRule { dim, nodes, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, q: usize) -> &[f64] {
        &self.nodes[q * self.dim..(q + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature sum of `f` over the window; rejects non-finite values.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (node, w) in self.nodes().zip(&self.weights) {
            let v = f(node);
            if !v.is_finite() {
                return Err(Error::NonFinite("integrand"));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Midpoint rule on the uniform axis-aligned partition with
/// `cells_per_axis` cells along every axis.
pub fn build_quadrature(window: &Window, cells_per_axis: usize) -> Result<QuadratureRule> {
    if cells_per_axis == 0 {
        return Err(Error::InvalidArgument("cells_per_axis must be >= 1".into()));
    }
    let dim = window.dim();
    let count = cells_per_axis.pow(dim as u32);
    let weight = window.volume() / count as f64;
    let steps: Vec<f64> = window
        .lower
        .iter()
        .zip(&window.upper)
        .map(|(lo, hi)| (hi - lo) / cells_per_axis as f64)
        .collect();
    let mut nodes = Vec::with_capacity(count * dim);
    let mut index = vec![0usize; dim];
    for _ in 0..count {
        for k in 0..dim {
            nodes.push(window.lower[k] + (index[k] as f64 + 0.5) * steps[k]);
        }
        for k in (0..dim).rev() {
            index[k] += 1;
            if index[k] < cells_per_axis {
                break;
            }
            index[k] = 0;
        }
    }
    Ok(QuadratureRule {
        dim,
        nodes,
        weights: vec![weight; count],
    })
}

/// Configuration for an interpolation basis over [0,1]^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisConfig {
    /// Equally spaced nodes with hat functions on [0,1].
    Linear1d { nodes: usize },
    /// Structured triangulation of [0,1]^2 (each grid cell split in two),
    /// sized so that every element area is at most `max_area`.
    Triangular2d { max_area: f64 },
    /// Regular grid on [0,1]^3 with trilinear cell interpolation.
    Trilinear3d { nodes_per_axis: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum BasisKind {
    Hat1d { n: usize },
    Tri2d { n: usize },
    Trilinear3d { n: usize },
}

/// Partition-of-unity interpolation basis with nodes z_1..z_V in [0,1]^d.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationBasis {
    dim: usize,
    nodes: Vec<f64>,
    kind: BasisKind,
}

/// Nonzero basis functions at one evaluation point (at most 8).
#[derive(Debug, Clone, Copy)]
pub struct LocalSupport {
    pub idx: [usize; 8],
    pub weight: [f64; 8],
    pub len: usize,
}

impl LocalSupport {
    fn new() -> LocalSupport {
        LocalSupport {
            idx: [0; 8],
            weight: [0.0; 8],
            len: 0,
        }
    }

    fn push(&mut self, idx: usize, weight: f64) {
        self.idx[self.len] = idx;
        self.weight[self.len] = weight;
        self.len += 1;
    }
}

/// Clamped cell lookup on n equally spaced nodes: returns (cell, offset in [0,1]).
fn locate(z: f64, n: usize) -> (usize, f64) {
    let scaled = z * (n - 1) as f64;
    let cell = (scaled.floor() as usize).min(n - 2);
    (cell, scaled - cell as f64)
}

pub fn build_basis(dim: usize, config: BasisConfig) -> Result<InterpolationBasis> {
    match (dim, config) {
        (1, BasisConfig::Linear1d { nodes }) => {
            if nodes < 2 {
                return Err(Error::InvalidArgument("1-d basis needs >= 2 nodes".into()));
            }
            let h = 1.0 / (nodes - 1) as f64;
            let coords: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
            Ok(InterpolationBasis {
                dim: 1,
                nodes: coords,
                kind: BasisKind::Hat1d { n: nodes },
            })
        }
        (2, BasisConfig::Triangular2d { max_area }) => {
            if !(max_area > 0.0) {
                return Err(Error::InvalidArgument("max_area must be positive".into()));
            }
            // Node density calibrated to typical quality-mesh output for the
            // same area bound; every structured element stays below the bound.
            let mut n = ((1.0 / (1.1 * max_area)).sqrt().floor() as usize).max(2);
            while 0.5 / ((n - 1) as f64).powi(2) > max_area {
                n += 1;
            }
            let h = 1.0 / (n - 1) as f64;
            let mut coords = Vec::with_capacity(n * n * 2);
            for iy in 0..n {
                for ix in 0..n {
                    coords.push(ix as f64 * h);
                    coords.push(iy as f64 * h);
                }
            }
            Ok(InterpolationBasis {
                dim: 2,
                nodes: coords,
                kind: BasisKind::Tri2d { n },
            })
        }
        (3, BasisConfig::Trilinear3d { nodes_per_axis }) => {
            if nodes_per_axis < 2 {
                return Err(Error::InvalidArgument(
                    "3-d basis needs >= 2 nodes per axis".into(),
                ));
            }
            let n = nodes_per_axis;
            let h = 1.0 / (n - 1) as f64;
            let mut coords = Vec::with_capacity(n * n * n * 3);
            for iz in 0..n {
                for iy in 0..n {
                    for ix in 0..n {
                        coords.push(ix as f64 * h);
                        coords.push(iy as f64 * h);
                        coords.push(iz as f64 * h);
                    }
                }
            }
            Ok(InterpolationBasis {
                dim: 3,
                nodes: coords,
                kind: BasisKind::Trilinear3d { n },
            })
        }
        (d, _) if !(1..=3).contains(&d) => Err(Error::InvalidArgument(format!(
            "basis dimension must be 1, 2 or 3, got {d}"
        ))),
        (d, cfg) => Err(Error::InvalidArgument(format!(
            "basis config {cfg:?} does not match dimension {d}"
        ))),
    }
}

impl InterpolationBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis functions V.
    pub fn len(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: usize) -> &[f64] {
        &self.nodes[v * self.dim..(v + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        if z.iter().any(|&zi| !(0.0..=1.0).contains(&zi)) {
            return Err(Error::OutOfDomain { point: z.to_vec() });
        }
        Ok(())
    }

    /// Indices and weights of the basis functions supported at `z`.
    pub fn local_support(&self, z: &[f64]) -> Result<LocalSupport> {
        self.check_point(z)?;
        let mut out = LocalSupport::new();
        match self.kind {
            BasisKind::Hat1d { n } => {
                let (c, t) = locate(z[0], n);
                out.push(c, 1.0 - t);
                out.push(c + 1, t);
            }
            BasisKind::Tri2d { n } => {
                let (cx, u) = locate(z[0], n);
                let (cy, v) = locate(z[1], n);
                let base = cy * n + cx;
                if u >= v {
                    out.push(base, 1.0 - u);
                    out.push(base + 1, u - v);
                    out.push(base + n + 1, v);
                } else {
                    out.push(base, 1.0 - v);
                    out.push(base + n, v - u);
                    out.push(base + n + 1, u);
                }
            }
            BasisKind::Trilinear3d { n } => {
                let (cx, u) = locate(z[0], n);
                let (cy, v) = locate(z[1], n);
                let (cz, w) = locate(z[2], n);
                for corner in 0..8usize {
                    let (dx, dy, dz) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
                    let wx = if dx == 1 { u } else { 1.0 - u };
                    let wy = if dy == 1 { v } else { 1.0 - v };
                    let wz = if dz == 1 { w } else { 1.0 - w };
                    out.push((cz + dz) * n * n + (cy + dy) * n + (cx + dx), wx * wy * wz);
                }
            }
        }
        Ok(out)
    }

    /// Sum_v coeffs_v psi_v(z); exact at nodes.
    pub fn evaluate(&self, coeffs: &[f64], z: &[f64]) -> Result<f64> {
        if coeffs.len() != self.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        let sup = self.local_support(z)?;
        let mut acc = 0.0;
        for k in 0..sup.len {
            acc += sup.weight[k] * coeffs[sup.idx[k]];
        }
        Ok(acc)
    }

    /// Precompute the sparse evaluation structure for a fixed point list
    /// (row-major, `dim` coordinates per point).
    pub fn project(&self, points: &[f64]) -> Result<BasisProjection> {
        assert_eq!(points.len() % self.dim, 0);
        let stride = match self.kind {
            BasisKind::Hat1d { .. } => 2,
            BasisKind::Tri2d { .. } => 3,
            BasisKind::Trilinear3d { .. } => 8,
        };
        let m = points.len() / self.dim;
        let mut idx = Vec::with_capacity(m * stride);
        let mut weight = Vec::with_capacity(m * stride);
        for p in points.chunks_exact(self.dim) {
            let sup = self.local_support(p)?;
            debug_assert_eq!(sup.len, stride);
            for k in 0..stride {
                idx.push(sup.idx[k] as u32);
                weight.push(sup.weight[k]);
            }
        }
        Ok(BasisProjection { stride, idx, weight })
    }
}

/// Sparse interpolation operator for a frozen list of evaluation points:
/// row p applied to a coefficient vector yields w(z_p).
#[derive(Debug, Clone)]
pub struct BasisProjection {
    stride: usize,
    idx: Vec<u32>,
    weight: Vec<f64>,
}

impl BasisProjection {
    pub fn len(&self) -> usize {
        self.idx.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    /// Evaluate the interpolant at point `p` of the frozen list.
    pub fn eval(&self, coeffs: &[f64], p: usize) -> f64 {
        let s = self.stride;
        let mut acc = 0.0;
        for k in p * s..(p + 1) * s {
            acc += self.weight[k] * coeffs[self.idx[k] as usize];
        }
        acc
    }

    /// Evaluate the interpolant at every frozen point into `out`.
    pub fn eval_all(&self, coeffs: &[f64], out: &mut [f64]) {
        assert_eq!(out.len(), self.len());
        let s = self.stride;
        for (p, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in p * s..(p + 1) * s {
                acc += self.weight[k] * coeffs[self.idx[k] as usize];
            }
            *slot = acc;
        }
    }
}
