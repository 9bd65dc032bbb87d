//! Library of synthetic ground-truth intensity functions on [0,1]^d.

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_pdf};

/// Univariate skew-normal density (2/omega) phi((x-xi)/omega) Phi(alpha (x-xi)/omega).
pub fn skew_normal_pdf(x: f64, xi: f64, omega: f64, alpha: f64) -> f64 {
    let t = (x - xi) / omega;
    2.0 / omega * normal_pdf(t) * normal_cdf(alpha * t)
}

/// Quintic smoothstep clamped to [0,1].
fn smoothstep(t: f64) -> f64 {
    let v = 6.0 * t.powi(5) - 15.0 * t.powi(4) + 10.0 * t.powi(3);
    v.clamp(0.0, 1.0)
}

/// Circular distance of z from c on the unit-period torus (at most 1/2).
fn circ_dist(z: f64, c: f64) -> f64 {
    let d = (z - c).abs();
    d.min(1.0 - d)
}

/// Plateau bump of half-width a/2 centered at c.
fn plateau(z: f64, c: f64, a: f64) -> f64 {
    1.0 - smoothstep(2.0 * circ_dist(z, c) / a)
}

/// Isotropic bivariate skew kernel: 2 exp(-|u|^2 / (2 c)) Phi(alpha . u / sqrt(c)).
fn skew_kernel_2d(u1: f64, u2: f64, c: f64, a1: f64, a2: f64) -> f64 {
    2.0 * (-0.5 * (u1 * u1 + u2 * u2) / c).exp() * normal_cdf((a1 * u1 + a2 * u2) / c.sqrt())
}

/// Isotropic bivariate skew-normal density with covariance c * I.
fn skew_density_2d(u1: f64, u2: f64, c: f64, a1: f64, a2: f64) -> f64 {
    skew_kernel_2d(u1, u2, c, a1, a2) / (2.0 * std::f64::consts::PI * c)
}

/// Named ground-truth covariate-based intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthSpec {
    /// 5 x skew-normal(0.8, 0.3, -5) on [0,1]; peaks near 12 at z ~ 0.65.
    SkewNormal1d,
    /// 2 exp(3(1-z) - 1): smooth exponential decay.
    ExpDecay1d,
    /// Flat baseline 2 with a plateau bump at 3/4 and a matching dip at 1/4.
    Plateau1d,
    /// Anisotropic two-bump surface built from Gaussian kernels with
    /// per-axis scales 0.08 and 0.5.
    AnisoGauss2d,
    /// Level 30 with a wide skewed basin clamped at zero.
    SkewBasin2d,
    /// Mixture of two skew-normal peaks with weights 6 and 14.
    SkewPeaks2d,
}

impl TruthSpec {
    pub const ALL: [TruthSpec; 6] = [
        TruthSpec::SkewNormal1d,
        TruthSpec::ExpDecay1d,
        TruthSpec::Plateau1d,
        TruthSpec::AnisoGauss2d,
        TruthSpec::SkewBasin2d,
        TruthSpec::SkewPeaks2d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TruthSpec::SkewNormal1d => "skew_normal_1d",
            TruthSpec::ExpDecay1d => "exp_decay_1d",
            TruthSpec::Plateau1d => "plateau_1d",
            TruthSpec::AnisoGauss2d => "aniso_gauss_2d",
            TruthSpec::SkewBasin2d => "skew_basin_2d",
            TruthSpec::SkewPeaks2d => "skew_peaks_2d",
        }
    }

    pub fn from_name(name: &str) -> Result<TruthSpec> {
        TruthSpec::ALL
            .iter()
            .copied()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown truth '{name}'")))
    }

    pub fn dim(&self) -> usize {
        match self {
            TruthSpec::SkewNormal1d | TruthSpec::ExpDecay1d | TruthSpec::Plateau1d => 1,
            _ => 2,
        }
    }

    /// Evaluate the intensity at z in [0,1]^d.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    fn eval_unchecked(&self, z: &[f64]) -> f64 {
        match self {
            TruthSpec::SkewNormal1d => 5.0 * skew_normal_pdf(z[0], 0.8, 0.3, -5.0),
            TruthSpec::ExpDecay1d => 2.0 * (3.0 * (1.0 - z[0]) - 1.0).exp(),
            TruthSpec::Plateau1d => {
                let a = 0.375;
                2.0 + 2.0 * plateau(z[0], 0.75, a) - 2.0 * plateau(z[0], 0.25, a)
            }
            TruthSpec::AnisoGauss2d => {
                let bump = |c1: f64, c2: f64| {
                    let u1 = (z[0] - c1) / 0.08;
                    let u2 = (z[1] - c2) / 0.5;
                    (-0.5 * (u1 * u1 + u2 * u2)).exp()
                };
                (10.0 - 10.0 * bump(0.8, 0.3) + 10.0 * bump(0.3, 0.8)).max(0.0)
            }
            TruthSpec::SkewBasin2d => {
                let s = skew_kernel_2d(z[0] - 0.3, z[1] - 0.3, 0.5, -1.0, -1.0);
                (30.0 - 90.0 * s).max(0.0)
            }
            TruthSpec::SkewPeaks2d => {
                6.0 * skew_density_2d(z[0] - 0.3, z[1] - 0.8, 0.03, -1.0, -1.0)
                    + 14.0 * skew_density_2d(z[0] - 0.7, z[1] - 0.2, 0.05, 3.0, -2.0)
            }
        }
    }

    /// Dominating bound computed by dense grid search times a 1.001 safety
    /// factor (4096 points in 1-d, 512 per axis in 2-d).
    pub fn rho_upper(&self) -> f64 {
        let mut max = 0.0f64;
        match self.dim() {
            1 => {
                let m = 4096;
                for i in 0..m {
                    let z = i as f64 / (m - 1) as f64;
                    max = max.max(self.eval_unchecked(&[z]));
                }
            }
            _ => {
                let m = 512;
                for i in 0..m {
                    for j in 0..m {
                        let z = [i as f64 / (m - 1) as f64, j as f64 / (m - 1) as f64];
                        max = max.max(self.eval_unchecked(&z));
                    }
                }
            }
        }
        max * 1.001
    }
}
