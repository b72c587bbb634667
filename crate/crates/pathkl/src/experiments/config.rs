//! Experiment configuration: a flat TOML file with one `[data]` table.
//!
//! ```toml
//! horizon = 5.0            # total diffusion time T
//! steps = 500              # grid steps N (step size h = T / N)
//! n_paths = 10000
//! dim = 1
//! eps_score = 0.2          # pointwise score error budget
//! perturbation_mode = "constant_offset"   # or "random_direction"
//! master_seed = 42
//! out_dir = "out"
//! emit_svg = true
//!
//! [data]
//! kind = "gaussian"
//! mean = [2.0]
//! var = [4.0]
//! ```
//!
//! The line dataset (`kind = "line_y_equals_x"`, fields `n_points`,
//! `var_floor`) draws `x ~ Uniform[-2, 2]`, sets `y = x`, and adds isotropic
//! Gaussian jitter of variance `var_floor`; it requires `dim = 2`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianSpec;
use crate::score::PerturbationMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSpec {
    /// Diagonal Gaussian data with per-coordinate mean and variance.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// Points on the line y = x with isotropic jitter.
    LineYEqualsX { n_points: usize, var_floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    ConstantOffset,
    RandomDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Total diffusion time T.
    pub horizon: f64,
    /// Number of grid steps N.
    pub steps: usize,
    pub n_paths: usize,
    pub dim: usize,
    pub eps_score: f64,
    pub perturbation_mode: PerturbationKind,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub emit_svg: bool,
    pub data: DataSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            horizon: 5.0,
            steps: 500,
            n_paths: 10_000,
            dim: 1,
            eps_score: 0.2,
            perturbation_mode: PerturbationKind::ConstantOffset,
            master_seed: 42,
            out_dir: PathBuf::from("out"),
            emit_svg: true,
            data: DataSpec::Gaussian {
                mean: vec![2.0],
                var: vec![4.0],
            },
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if self.steps == 0 || self.n_paths == 0 || self.dim == 0 {
            return Err(Error::InvalidConfig(
                "steps, n_paths and dim must all be >= 1".into(),
            ));
        }
        if !(self.eps_score >= 0.0) || !self.eps_score.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "eps_score must be >= 0, got {}",
                self.eps_score
            )));
        }
        match &self.data {
            DataSpec::Gaussian { mean, var } => {
                if mean.len() != self.dim || var.len() != self.dim {
                    return Err(Error::InvalidConfig(format!(
                        "data mean/var must have dim = {} entries",
                        self.dim
                    )));
                }
                if var.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::InvalidConfig(
                        "data variances must be strictly positive".into(),
                    ));
                }
            }
            DataSpec::LineYEqualsX { n_points, var_floor } => {
                if self.dim != 2 {
                    return Err(Error::InvalidConfig(
                        "line_y_equals_x data requires dim = 2".into(),
                    ));
                }
                if *n_points < 2 {
                    return Err(Error::InvalidConfig("n_points must be >= 2".into()));
                }
                if !(*var_floor > 0.0) {
                    return Err(Error::InvalidConfig(
                        "var_floor must be strictly positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("serialize failed: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("parse failed: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// True when the data distribution is Gaussian (closed forms available).
    pub fn is_gaussian_data(&self) -> bool {
        matches!(self.data, DataSpec::Gaussian { .. })
    }

    /// The Gaussian data distribution, if the config declares one.
    pub fn gaussian_q0(&self) -> Result<GaussianSpec> {
        match &self.data {
            DataSpec::Gaussian { mean, var } => GaussianSpec::new(mean.clone(), var.clone()),
            DataSpec::LineYEqualsX { .. } => Err(Error::domain(
                "data distribution is not Gaussian; closed forms unavailable",
            )),
        }
    }

    /// Score perturbation in the form the score module consumes, with the
    /// direction bucket width tied to the grid step size.
    pub fn perturbation(&self, step_size: f64, seed: u64) -> PerturbationMode {
        match self.perturbation_mode {
            PerturbationKind::ConstantOffset => PerturbationMode::ConstantOffset,
            PerturbationKind::RandomDirection => PerturbationMode::RandomDirection {
                seed,
                bucket_width: step_size,
            },
        }
    }
}
