//! Small sample-statistics helpers: moments, quantiles, Kolmogorov-Smirnov.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (denominator m - 1).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Quantile by linear interpolation of order statistics on a sorted slice:
/// q(p) sits at fractional rank (m - 1) * p.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = h - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, p)
}

/// Interquartile range with interpolated quartiles.
pub fn iqr(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

/// Kolmogorov-Smirnov statistic of a sample against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / m;
        let hi = (i + 1) as f64 / m;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Tabulated CDF on a grid, normalized from unnormalized density values by
/// the trapezoid rule. Evaluation interpolates linearly between grid points.
pub struct GridCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridCdf {
    pub fn from_unnormalized_density(grid: &[f64], density: &[f64]) -> Self {
        assert_eq!(grid.len(), density.len());
        assert!(grid.len() >= 2);
        let mut cdf = vec![0.0; grid.len()];
        for i in 1..grid.len() {
            let h = grid[i] - grid[i - 1];
            cdf[i] = cdf[i - 1] + 0.5 * h * (density[i] + density[i - 1]);
        }
        let total = *cdf.last().unwrap();
        assert!(total > 0.0, "density must have positive mass on the grid");
        for c in cdf.iter_mut() {
            *c /= total;
        }
        GridCdf {
            grid: grid.to_vec(),
            cdf,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= *self.grid.last().unwrap() {
            return 1.0;
        }
        let idx = self.grid.partition_point(|&g| g <= x);
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }
}
