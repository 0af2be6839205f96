//! Cost models for a schedule: restart and rewind time-to-solution,
//! qubitized walks, T-depth estimates and scaling fits.

mod depth;
mod qubitize;
mod tts;

use serde::{Deserialize, Serialize};

pub use depth::{
    gain, scaling_fit, tdepth_product_formula, tdepth_qubitized, DepthEstimate, DepthModel, LogArgument,
    ProductFormulaAnchor, ScalingFit, WalkDepthSettings,
};
pub use qubitize::{
    normalized_walk_hamiltonian, qubitize_schedule, qubitized_gap, tts_qubitized, walk_eigenstate, walk_points,
    Branch, QubitizationMode, QubitizationSettings, QubitizedSchedule, WalkLcu, WalkPoint, MAX_EXACT_SITES,
};
pub use tts::{
    repetitions, rewind_step_chain, rewind_step_series, rewind_steps, tts_plain, tts_plain_profile, tts_rewind,
    tts_rewind_profile, validate_profile, RewindEvaluator, SERIES_TOL,
};

use crate::error::{Error, Result};
use crate::schedule::ScheduleData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    Plain,
    Rewind,
    QubitizedGapmap,
    QubitizedExact,
}

impl CostModel {
    pub const ALL: [CostModel; 4] = [
        CostModel::Plain,
        CostModel::Rewind,
        CostModel::QubitizedGapmap,
        CostModel::QubitizedExact,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CostModel::Plain => "plain",
            CostModel::Rewind => "rewind",
            CostModel::QubitizedGapmap => "qubitized_gapmap",
            CostModel::QubitizedExact => "qubitized_exact",
        }
    }

    pub fn units(&self) -> Units {
        match self {
            CostModel::Plain | CostModel::Rewind => Units::HubbardTime,
            CostModel::QubitizedGapmap | CostModel::QubitizedExact => Units::WalkApplications,
        }
    }
}

impl std::fmt::Display for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CostModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostModel::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown cost model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Evolution time in units of the hopping amplitude.
    HubbardTime,
    WalkApplications,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub model: CostModel,
    pub units: Units,
    #[serde(with = "crate::nonfinite")]
    pub tts: f64,
    /// Restart count `ln(eps)/ln(1-p)`, restart protocol only.
    #[serde(with = "crate::nonfinite::option")]
    pub repetitions: Option<f64>,
    pub success_prob: f64,
    pub per_step: Vec<f64>,
    pub epsilon: f64,
    /// Gaps entering the step costs, `j = 0..=L`.
    pub step_gaps: Vec<f64>,
    pub fidelities: Vec<f64>,
    /// Same model over window-normalized gaps.
    #[serde(default, with = "crate::nonfinite::option")]
    pub normalized_tts: Option<f64>,
    /// Rewind only: the printed-series evaluator next to the chain value.
    #[serde(default)]
    pub series_tts: Option<f64>,
}

impl CostReport {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(format!("{} report: {msg}", self.model)));
        if self.units != self.model.units() {
            return fail(format!("units {:?}", self.units));
        }
        if !(self.tts > 0.0) {
            return fail(format!("tts = {}", self.tts));
        }
        if !(0.0..=1.0).contains(&self.success_prob) || (self.success_prob == 0.0 && self.tts.is_finite()) {
            return fail(format!("success probability {}", self.success_prob));
        }
        if self.per_step.len() != self.fidelities.len() || self.step_gaps.len() != self.fidelities.len() + 1 {
            return fail("step lists have inconsistent lengths".into());
        }
        if self.repetitions.is_some() != (self.model == CostModel::Plain) {
            return fail("repetitions belong to the restart protocol only".into());
        }
        if self.tts.is_finite() {
            let sum: f64 = self.per_step.iter().sum::<f64>() * self.repetitions.unwrap_or(1.0);
            if (sum - self.tts).abs() > 1e-9 * self.tts {
                return fail(format!("per-step sum {sum} differs from tts {}", self.tts));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSettings {
    pub epsilon: f64,
    pub rewind: RewindEvaluator,
    pub qubitization: QubitizationSettings,
}

impl Default for CostSettings {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            rewind: RewindEvaluator::Chain,
            qubitization: QubitizationSettings::default(),
        }
    }
}

/// Evaluate one cost model; the qubitized models override the settings' mode.
pub fn evaluate(model: CostModel, data: &ScheduleData, settings: &CostSettings) -> Result<CostReport> {
    let mut report = match model {
        CostModel::Plain => tts_plain(data, settings.epsilon)?,
        CostModel::Rewind => tts_rewind(data, settings.rewind)?,
        CostModel::QubitizedGapmap | CostModel::QubitizedExact => {
            let mode = if model == CostModel::QubitizedExact {
                QubitizationMode::Exact
            } else {
                QubitizationMode::Gapmap
            };
            let q = QubitizationSettings {
                mode,
                ..settings.qubitization
            };
            tts_qubitized(&qubitize_schedule(data, &q)?)?
        }
    };
    report.epsilon = settings.epsilon;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_round_trip() {
        for m in CostModel::ALL {
            assert_eq!(m.as_str().parse::<CostModel>().unwrap(), m);
        }
        assert!("trotter".parse::<CostModel>().is_err());
    }

    #[test]
    fn validate_catches_inconsistency() {
        let mut r = tts_plain_profile(&[0.5, 0.9], &[1.0, 0.5, 0.7], 0.01).unwrap();
        r.validate().unwrap();
        r.tts *= 1.1;
        assert!(r.validate().is_err());
        let mut r = tts_rewind_profile(&[0.5], &[1.0, 1.0], RewindEvaluator::Chain).unwrap();
        r.validate().unwrap();
        r.repetitions = Some(2.0);
        assert!(r.validate().is_err());
    }
}
