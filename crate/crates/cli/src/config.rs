//! Run configuration: one JSON document, versioned, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zenoprep_core::cost::{
    CostModel, CostSettings, ProductFormulaAnchor, QubitizationSettings, RewindEvaluator, WalkDepthSettings,
};
use zenoprep_core::model::{build_lattice, LatticeSpec, SectorSpec, DEFAULT_MAX_DIM};
use zenoprep_core::schedule::{Instance, OptimizerPolicy, DEFAULT_MARGIN};
use zenoprep_core::spectral::SpectralConfig;
use zenoprep_core::walksim::EXACT_SIM_THRESHOLD;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "ZENOPREP_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "zenoprep-cache";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub m: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorOverride {
    pub n_up: usize,
    pub n_down: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DepthConfig {
    pub product_formula: ProductFormulaAnchor,
    pub walk: WalkDepthSettings,
}

/// Monte Carlo validation of the optimized schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Also run exact projective simulation when the sector is small enough.
    pub exact: bool,
    pub exact_sim_threshold: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
            exact: true,
            exact_sim_threshold: EXACT_SIM_THRESHOLD,
        }
    }
}

fn default_doping() -> f64 {
    0.1
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_models() -> Vec<CostModel> {
    CostModel::ALL.to_vec()
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub lattice: LatticeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_override: Option<f64>,
    #[serde(default = "default_doping")]
    pub doping: f64,
    /// Explicit particle numbers, replacing the doping rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorOverride>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_models")]
    pub cost_models: Vec<CostModel>,
    #[serde(default)]
    pub optimizer: OptimizerPolicy,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default)]
    pub qubitization: QubitizationSettings,
    #[serde(default)]
    pub rewind: RewindEvaluator,
    #[serde(default)]
    pub depth: DepthConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(m: usize, k: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            lattice: LatticeConfig { m, k },
            u_override: None,
            doping: default_doping(),
            sector: None,
            epsilon: default_epsilon(),
            cost_models: default_models(),
            optimizer: OptimizerPolicy::default(),
            spectral: SpectralConfig::default(),
            margin: DEFAULT_MARGIN,
            max_dim: DEFAULT_MAX_DIM,
            qubitization: QubitizationSettings::default(),
            rewind: RewindEvaluator::default(),
            depth: DepthConfig::default(),
            mc: None,
            cache_dir: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Every check that can fail before an eigensolve.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.lattice_spec()?;
        if let Some(u) = self.u_override {
            if !(u.is_finite() && u >= 0.0) {
                return bad(format!("u_override = {u} must be finite and non-negative"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon = {} must lie in (0, 1)", self.epsilon));
        }
        if self.cost_models.is_empty() {
            return bad("cost_models is empty".into());
        }
        if !(self.margin > 0.0 && self.margin < std::f64::consts::PI) {
            return bad(format!("margin = {} must lie in (0, pi)", self.margin));
        }
        if self.qubitization.margin != self.margin {
            return bad(format!(
                "qubitization.margin = {} differs from margin = {}",
                self.qubitization.margin, self.margin
            ));
        }
        if let Some(mc) = &self.mc {
            if mc.trials == 0 {
                return bad("mc.trials must be positive".into());
            }
        }
        self.optimizer.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.spectral.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.instance()?;
        Ok(())
    }

    pub fn lattice_label(&self) -> String {
        format!("{}x{}", self.lattice.m, self.lattice.k)
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec, CliError> {
        build_lattice(self.lattice.m, self.lattice.k).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn instance(&self) -> Result<Instance, CliError> {
        let lat = self.lattice_spec()?;
        let inst = match self.sector {
            Some(s) => SectorSpec::new(lat.n_sites, s.n_up, s.n_down)
                .and_then(|sec| Instance::with_sector(lat, self.u_override, sec)),
            None => Instance::new(lat, self.u_override, self.doping),
        };
        inst.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn cost_settings(&self) -> CostSettings {
        CostSettings {
            epsilon: self.epsilon,
            rewind: self.rewind,
            qubitization: self.qubitization,
        }
    }

    /// Explicit setting, then the environment, then `./zenoprep-cache`.
    pub fn resolved_cache_dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
    }
}
