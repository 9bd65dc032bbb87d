//! Experiment configuration: JSON schema, validation, and named presets.

use serde::{Deserialize, Serialize};

use coxgp::geometry::{BasisConfig, Window};
use coxgp::model::HyperParams;
use coxgp::random_field::Preprocess;
use coxgp::sampler::{InitMode, SamplerConfig};
use coxgp::truth::TruthSpec;

use crate::error::{CliError, Result};

/// Length-scale of the fast-varying covariate component.
pub const LENGTHSCALE_FINE: f64 = 0.005;
/// Length-scale of the smoother second covariate component.
pub const LENGTHSCALE_COARSE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SimulateFromTruth,
    ExternalData,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl WindowConfig {
    pub fn build(&self) -> Result<Window> {
        Ok(Window::new(self.lower.clone(), self.upper.clone())?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// Grid nodes per window axis.
    pub resolution: usize,
    /// One squared-exponential length-scale per covariate component.
    pub lengthscales: Vec<f64>,
    /// "phi" (standard normal CDF) or "empirical" (pooled rank transform).
    pub preprocess: PreprocessConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreprocessConfig {
    Phi,
    Empirical,
}

impl PreprocessConfig {
    pub fn to_core(self) -> Preprocess {
        match self {
            PreprocessConfig::Phi => Preprocess::NormalCdf,
            PreprocessConfig::Empirical => Preprocess::EmpiricalCdf,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind")]
pub enum BasisConfigFile {
    #[serde(rename = "linear_1d")]
    Linear1d { nodes: usize },
    #[serde(rename = "triangular_2d")]
    Triangular2d { max_area: f64 },
    #[serde(rename = "trilinear_3d")]
    Trilinear3d { nodes_per_axis: usize },
}

impl BasisConfigFile {
    pub fn dim(&self) -> usize {
        match self {
            BasisConfigFile::Linear1d { .. } => 1,
            BasisConfigFile::Triangular2d { .. } => 2,
            BasisConfigFile::Trilinear3d { .. } => 3,
        }
    }

    pub fn to_core(&self) -> BasisConfig {
        match *self {
            BasisConfigFile::Linear1d { nodes } => BasisConfig::Linear1d { nodes },
            BasisConfigFile::Triangular2d { max_area } => BasisConfig::Triangular2d { max_area },
            BasisConfigFile::Trilinear3d { nodes_per_axis } => {
                BasisConfig::Trilinear3d { nodes_per_axis }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperConfig {
    pub a_rho: f64,
    pub b_rho: f64,
    pub a_theta: f64,
    pub b_theta: f64,
    pub a_gamma: f64,
    pub b_gamma: f64,
}

impl Default for HyperConfig {
    fn default() -> Self {
        let h = HyperParams::default();
        HyperConfig {
            a_rho: h.a_rho,
            b_rho: h.b_rho,
            a_theta: h.a_theta,
            b_theta: h.b_theta,
            a_gamma: h.a_gamma,
            b_gamma: h.b_gamma,
        }
    }
}

impl HyperConfig {
    pub fn to_core(self) -> HyperParams {
        HyperParams {
            a_rho: self.a_rho,
            b_rho: self.b_rho,
            a_theta: self.a_theta,
            b_theta: self.b_theta,
            a_gamma: self.a_gamma,
            b_gamma: self.b_gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfigFile {
    pub iterations: usize,
    pub burn_in: usize,
    pub zeta: f64,
    #[serde(default = "default_true")]
    pub tune_zeta: bool,
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    #[serde(default = "default_adapt_rate")]
    pub adapt_rate: f64,
    #[serde(default = "default_target_accept")]
    pub target_accept: f64,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default)]
    pub deterministic_start: bool,
}

fn default_true() -> bool {
    true
}
fn default_initial_step() -> f64 {
    0.5
}
fn default_adapt_rate() -> f64 {
    0.6
}
fn default_target_accept() -> f64 {
    0.3
}
fn default_thin() -> usize {
    10
}

impl SamplerConfigFile {
    pub fn to_core(self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            zeta: self.zeta,
            tune_zeta: self.tune_zeta,
            initial_step: self.initial_step,
            adapt_rate: self.adapt_rate,
            target_accept: self.target_accept,
            thin: self.thin,
            seed,
            init: if self.deterministic_start {
                InitMode::Deterministic
            } else {
                InitMode::Prior
            },
        }
    }
}

/// Paths for the external-data scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalData {
    pub pattern_file: String,
    pub raster_file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub truth: Option<String>,
    pub window: WindowConfig,
    pub field: FieldConfig,
    /// Sample sizes (one table column per entry).
    pub n: Vec<usize>,
    pub basis: BasisConfigFile,
    pub quadrature_cells_per_axis: usize,
    #[serde(default)]
    pub hyper: HyperConfig,
    pub sampler: SamplerConfigFile,
    pub replications: usize,
    /// Evaluation grid points per covariate axis.
    pub zgrid: Vec<usize>,
    #[serde(default = "default_level")]
    pub credible_level: f64,
    /// Store w snapshots as a binary row-major dump instead of CSV.
    #[serde(default)]
    pub w_binary: bool,
    #[serde(default = "default_true")]
    pub baseline: bool,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub data: Option<ExternalData>,
}

fn default_level() -> f64 {
    0.95
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn truth_spec(&self) -> Result<Option<TruthSpec>> {
        match &self.truth {
            None => Ok(None),
            Some(name) => Ok(Some(TruthSpec::from_name(name)?)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let window = self.window.build()?;
        let d = self.field.lengthscales.len();
        if d == 0 {
            return Err(CliError::Config("field needs >= 1 lengthscale".into()));
        }
        if self.basis.dim() != d {
            return Err(CliError::Config(format!(
                "basis dimension {} does not match covariate dimension {d}",
                self.basis.dim()
            )));
        }
        if self.zgrid.len() != d {
            return Err(CliError::Config(format!(
                "zgrid has {} axes, expected {d}",
                self.zgrid.len()
            )));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(CliError::Config("n must be non-empty and positive".into()));
        }
        if self.replications == 0 {
            return Err(CliError::Config("replications must be >= 1".into()));
        }
        if self.quadrature_cells_per_axis == 0 {
            return Err(CliError::Config("quadrature resolution must be >= 1".into()));
        }
        if !(self.credible_level > 0.0 && self.credible_level < 1.0) {
            return Err(CliError::Config("credible_level must lie in (0,1)".into()));
        }
        match self.scenario {
            Scenario::SimulateFromTruth => {
                let Some(truth) = self.truth_spec()? else {
                    return Err(CliError::Config(
                        "simulate_from_truth needs a truth name".into(),
                    ));
                };
                if truth.dim() != d {
                    return Err(CliError::Config(format!(
                        "truth '{}' has dimension {}, covariates have {d}",
                        truth.name(),
                        truth.dim()
                    )));
                }
            }
            Scenario::ExternalData => {
                if self.data.is_none() {
                    return Err(CliError::Config("external_data needs data paths".into()));
                }
            }
        }
        self.hyper.to_core().validate()?;
        self.sampler.to_core(self.seed).validate()?;
        let _ = window;
        Ok(())
    }

    /// Named presets covering the synthetic-experiment setups.
    pub fn preset(name: &str) -> Result<ExperimentConfig> {
        let paper_sampler = SamplerConfigFile {
            iterations: 20_000,
            burn_in: 5_000,
            zeta: 0.2,
            tune_zeta: true,
            initial_step: 1.0,
            adapt_rate: 0.6,
            target_accept: 0.3,
            thin: 10,
            deterministic_start: false,
        };
        let base_1d = ExperimentConfig {
            scenario: Scenario::SimulateFromTruth,
            truth: Some("skew_normal_1d".into()),
            window: WindowConfig {
                lower: vec![-0.5, -0.5],
                upper: vec![0.5, 0.5],
            },
            field: FieldConfig {
                resolution: 101,
                lengthscales: vec![LENGTHSCALE_FINE],
                preprocess: PreprocessConfig::Phi,
            },
            n: vec![50, 250, 500, 1000],
            basis: BasisConfigFile::Linear1d { nodes: 200 },
            quadrature_cells_per_axis: 50,
            hyper: HyperConfig::default(),
            sampler: paper_sampler,
            replications: 100,
            zgrid: vec![400],
            credible_level: 0.95,
            w_binary: false,
            baseline: true,
            seed: 1,
            out: None,
            data: None,
        };
        let cfg = match name {
            "paper_1d" => base_1d,
            "paper_2d" => ExperimentConfig {
                truth: Some("aniso_gauss_2d".into()),
                field: FieldConfig {
                    resolution: 101,
                    lengthscales: vec![LENGTHSCALE_FINE, LENGTHSCALE_COARSE],
                    preprocess: PreprocessConfig::Phi,
                },
                n: vec![10, 50, 250, 1000],
                basis: BasisConfigFile::Triangular2d { max_area: 0.0014 },
                zgrid: vec![60, 60],
                ..base_1d
            },
            "desk_1d" => ExperimentConfig {
                n: vec![50, 250],
                basis: BasisConfigFile::Linear1d { nodes: 100 },
                sampler: SamplerConfigFile {
                    iterations: 5_000,
                    burn_in: 1_500,
                    ..paper_sampler
                },
                replications: 5,
                ..base_1d
            },
            "desk_1d_contraction" => ExperimentConfig {
                n: vec![50, 250, 1000],
                basis: BasisConfigFile::Linear1d { nodes: 100 },
                sampler: SamplerConfigFile {
                    iterations: 5_000,
                    burn_in: 1_500,
                    ..paper_sampler
                },
                replications: 3,
                baseline: false,
                ..base_1d
            },
            "desk_2d_aniso" => ExperimentConfig {
                truth: Some("aniso_gauss_2d".into()),
                field: FieldConfig {
                    resolution: 101,
                    lengthscales: vec![LENGTHSCALE_FINE, LENGTHSCALE_COARSE],
                    preprocess: PreprocessConfig::Phi,
                },
                n: vec![250],
                basis: BasisConfigFile::Triangular2d { max_area: 0.0014 },
                sampler: SamplerConfigFile {
                    iterations: 6_000,
                    burn_in: 2_000,
                    ..paper_sampler
                },
                replications: 1,
                zgrid: vec![60, 60],
                baseline: false,
                ..base_1d
            },
            other => {
                return Err(CliError::Config(format!(
                    "unknown preset '{other}' (available: paper_1d, paper_2d, desk_1d, desk_1d_contraction, desk_2d_aniso)"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
