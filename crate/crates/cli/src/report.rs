//! Pipeline report: per-model schedules and costs, gains, depth estimates
//! and Monte Carlo checks.

use std::path::Path;

use serde::{Deserialize, Serialize};
use zenoprep_core::cost::{CostModel, CostReport, DepthEstimate, Units};
use zenoprep_core::model::LatticeShape;
use zenoprep_core::schedule::{ScheduleData, StopReason, TraceEntry};
use zenoprep_core::walksim::{McResult, StepStats};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub label: String,
    pub shape: LatticeShape,
    pub m: usize,
    pub k: usize,
    pub n_sites: usize,
    pub t_hop: f64,
    pub u: f64,
    pub n_up: usize,
    pub n_down: usize,
    pub dim: usize,
    pub fingerprint: String,
}

/// One point of a schedule. Energies and gaps in Hubbard units, `normalized_gap`
/// on the `[0, 2 pi]` window; `fidelity` is the overlap with the previous point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub normalized_gap: f64,
    pub fidelity: Option<f64>,
}

pub fn schedule_rows(data: &ScheduleData) -> Vec<ScheduleRow> {
    data.points
        .iter()
        .enumerate()
        .map(|(i, p)| ScheduleRow {
            s: p.s,
            e0: p.spectral.e0,
            e1: p.spectral.e1,
            gap: p.spectral.gap,
            normalized_gap: p.normalized_gap,
            fidelity: i.checked_sub(1).map(|j| data.fidelities[j]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: CostModel,
    pub schedule: Vec<ScheduleRow>,
    pub cost: CostReport,
    /// Cost of the initial two-point schedule.
    #[serde(with = "zenoprep_core::nonfinite")]
    pub initial_tts: f64,
    pub trace: Vec<TraceEntry>,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedModel {
    pub model: CostModel,
    pub reason: String,
}

/// `tts(baseline) / tts(improved)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    pub baseline: CostModel,
    pub improved: CostModel,
    #[serde(with = "zenoprep_core::nonfinite")]
    pub gain: f64,
    /// Baseline units over improved units.
    pub units: (Units, Units),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRecord {
    /// Cost model whose TTS sets the operation count.
    pub source: CostModel,
    pub estimate: DepthEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceCheck {
    pub model: CostModel,
    pub protocol: zenoprep_core::walksim::Protocol,
    pub mc: McResult,
    /// Analytic value the Monte Carlo mean estimates, where one exists.
    pub expected_cost: Option<f64>,
    /// Product of the step fidelities.
    pub expected_success: f64,
    /// `(mean - expected) / std_error`, or for restart the success frequency deviation.
    #[serde(with = "zenoprep_core::nonfinite")]
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveCheck {
    pub model: CostModel,
    pub mc: McResult,
    pub first_step_frequency: f64,
    pub first_step_std_error: f64,
    pub expected_first_step: f64,
    pub final_fidelity_min: f64,
    pub steps: Vec<StepStats>,
    pub leakage: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub sequences: Vec<SequenceCheck>,
    pub projective: Option<ProjectiveCheck>,
    pub projective_skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub software_version: String,
    pub config: RunConfig,
    pub instance: InstanceInfo,
    /// Smallest raw gap over every point the optimizers visited, Hubbard units.
    pub delta_min: f64,
    /// Smallest window-normalized gap over the same points.
    pub normalized_delta_min: f64,
    pub models: Vec<ModelResult>,
    pub skipped_models: Vec<SkippedModel>,
    pub gains: Vec<Gain>,
    pub depths: Vec<DepthRecord>,
    pub mc: Option<McSummary>,
    /// The only field that differs between identical runs.
    pub wall_seconds: f64,
}

impl Report {
    pub fn model(&self, m: CostModel) -> Option<&ModelResult> {
        self.models.iter().find(|r| r.model == m)
    }

    pub fn tts(&self, m: CostModel) -> Option<f64> {
        self.model(m).map(|r| r.cost.tts)
    }

    pub fn depth(&self, source: CostModel) -> Option<&DepthEstimate> {
        self.depths.iter().find(|d| d.source == source).map(|d| &d.estimate)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: Report = serde_json::from_str(text).map_err(|e| CliError::Config(format!("report: {e}")))?;
        r.validate()?;
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// Consistency of every stored cost report with its schedule.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(format!("report: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {}", self.schema_version));
        }
        for r in &self.models {
            r.cost.validate().map_err(|e| CliError::Config(format!("report: {e}")))?;
            if r.cost.model != r.model {
                return bad(format!("{} entry holds a {} cost", r.model, r.cost.model));
            }
            let n = r.schedule.len();
            if n < 2 || r.cost.per_step.len() != n - 1 {
                return bad(format!("{}: {} points for {} steps", r.model, n, r.cost.per_step.len()));
            }
            if r.schedule.first().map(|p| p.s) != Some(0.0) || r.schedule.last().map(|p| p.s) != Some(1.0) {
                return bad(format!("{}: schedule does not span [0, 1]", r.model));
            }
            if r.schedule.windows(2).any(|w| w[1].s < w[0].s) {
                return bad(format!("{}: schedule not sorted", r.model));
            }
            if matches!(r.model, CostModel::Plain | CostModel::Rewind | CostModel::QubitizedGapmap) {
                let fids: Vec<f64> = r.schedule.iter().filter_map(|p| p.fidelity).collect();
                if fids != r.cost.fidelities {
                    return bad(format!("{}: schedule fidelities differ from the cost report", r.model));
                }
            }
            if r.cost.tts > r.initial_tts {
                return bad(format!("{}: optimized tts exceeds the initial tts", r.model));
            }
        }
        Ok(())
    }
}
