//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use magnon_core::fit::{FreeParam, Loss, ParamId};
use magnon_core::scattering::linspace;
use magnon_core::{CavityParams, HybridSystem, MagnonMode, MaterialParams, Observable, OpticalDrive};

use crate::error::{CliError, Result};

/// Inclusive grid of `count` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self { start: value, stop: value, count: 1 }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config(format!("{name}: start and stop must be finite")));
        }
        if self.count == 0 {
            return Err(CliError::Config(format!("{name}: count must be >= 1")));
        }
        if self.count > 1 && self.start >= self.stop {
            return Err(CliError::Config(format!("{name}: need start < stop when count > 1")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

fn default_observable() -> Observable {
    Observable::S21Power
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Bias field grid, T.
    pub field: Grid,
    /// Frequency grid, Hz.
    pub frequency: Grid,
    #[serde(default = "default_observable")]
    pub observable: Observable,
    /// Seed for synthetic noise.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitResponse {
    #[default]
    S21,
    S11,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParamConfig {
    pub id: ParamId,
    pub lower: f64,
    pub upper: f64,
    /// Starting value; defaults to the value in the system description.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Bias field of the measured spectrum, T; defaults to `sweep.field.start`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    #[serde(default)]
    pub response: FitResponse,
    #[serde(default)]
    pub loss: Loss,
    pub free: Vec<FreeParamConfig>,
}

impl FitConfig {
    pub fn free_params(&self) -> Vec<FreeParam> {
        self.free.iter().map(|p| FreeParam::new(p.id.clone(), p.lower, p.upper)).collect()
    }

    pub fn init(&self) -> Vec<(ParamId, f64)> {
        self.free.iter().filter_map(|p| p.init.map(|v| (p.id.clone(), v))).collect()
    }
}

/// Measured `(g, gamma)` of one mode, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredMode {
    pub g: f64,
    pub gamma: f64,
}

fn default_cavity_volume() -> f64 {
    magnon_core::coupling::REFERENCE_CAVITY_VOLUME
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeriveConfig {
    /// Cavity volume, m^3.
    #[serde(default = "default_cavity_volume")]
    pub cavity_volume: f64,
    /// Single-spin coupling, Hz; computed from `cavity_volume` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_b: Option<f64>,
    pub kittel: MeasuredMode,
    pub msm: MeasuredMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkerConfig {
    /// `(i, j)` pairs to tabulate.
    pub modes: Vec<(u32, i32)>,
    /// Bias field grid, T; defaults to `sweep.field`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Grid>,
}

/// Everything a command may need. Only `cavity` is mandatory; each command
/// checks for the sections it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cavity: CavityParams,
    #[serde(default)]
    pub modes: Vec<MagnonMode>,
    #[serde(default)]
    pub material: MaterialParams,
    #[serde(default)]
    pub optical: OpticalDrive,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derive: Option<DeriveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walker: Option<WalkerConfig>,
    /// Output file used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Write(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.system()?;
        if let Some(s) = &self.sweep {
            s.field.validate("sweep.field")?;
            s.frequency.validate("sweep.frequency")?;
        }
        if let Some(w) = &self.walker {
            if let Some(g) = &w.field {
                g.validate("walker.field")?;
            }
        }
        Ok(())
    }

    pub fn system(&self) -> Result<HybridSystem> {
        HybridSystem::new(self.cavity.clone(), self.modes.clone(), self.material.clone(), self.optical.clone())
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn sweep(&self) -> Result<&SweepConfig> {
        self.sweep.as_ref().ok_or_else(|| CliError::Config("missing [sweep] section".into()))
    }

    /// Sets `beta = 10^(db/10)` on every mode.
    pub fn apply_beta_db(&mut self, db: f64) -> Result<()> {
        if !db.is_finite() {
            return Err(CliError::Config("--beta-db must be finite".into()));
        }
        let beta = 10f64.powf(db / 10.0);
        for m in &mut self.modes {
            m.beta = beta;
        }
        self.validate()
    }
}
