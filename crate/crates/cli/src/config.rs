//! TOML run configuration. Every section is optional and unknown keys are rejected.

use std::path::{Path, PathBuf};

use nohide::circuit::Grid;
use nohide::nmrsim::ReceiverReference;
use nohide::pulsec::{NoiseModel, SpinSystem};
use nohide::tomo::DeviationMetric;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinsConfig {
    pub offsets_hz: Vec<f64>,
    pub j_hz: Vec<Vec<f64>>,
    pub t2_s: Vec<f64>,
}

impl Default for SpinsConfig {
    fn default() -> Self {
        let sys = SpinSystem::chfbr2();
        Self { offsets_hz: sys.offsets().to_vec(), j_hz: sys.couplings().to_vec(), t2_s: sys.t2_values().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub calibration_sigma: f64,
    pub ensemble: usize,
    pub t2: bool,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { calibration_sigma: 0.0, ensemble: 200, t2: false, seed: 2011 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub theta_steps: usize,
    pub phi_steps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = Grid::default();
        Self { theta_steps: g.theta_steps, phi_steps: g.phi_steps }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub receiver: ReceiverReference,
    pub deviation: DeviationMetric,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub scan: Option<PathBuf>,
    pub tomo: Option<PathBuf>,
    pub compile: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub spins: SpinsConfig,
    pub noise: NoiseConfig,
    pub grid: GridConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.spin_system()?;
        cfg.noise_model(None)?;
        cfg.grid(None, None)?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn spin_system(&self) -> Result<SpinSystem, CliError> {
        let s = &self.spins;
        SpinSystem::new(s.offsets_hz.clone(), s.j_hz.clone(), s.t2_s.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Noise model with an optional command-line override of the calibration sigma.
    pub fn noise_model(&self, sigma: Option<f64>) -> Result<NoiseModel, CliError> {
        let n = &self.noise;
        NoiseModel::new(sigma.unwrap_or(n.calibration_sigma), n.ensemble, n.t2, n.seed)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self, theta_steps: Option<usize>, phi_steps: Option<usize>) -> Result<Grid, CliError> {
        Grid::new(theta_steps.unwrap_or(self.grid.theta_steps), phi_steps.unwrap_or(self.grid.phi_steps))
            .map_err(|e| CliError::Config(e.to_string()))
    }
}
