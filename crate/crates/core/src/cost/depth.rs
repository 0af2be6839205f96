//! T-depth estimates, gain ratios and power-law scaling fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthModel {
    ProductFormula,
    QubitizedWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthEstimate {
    pub model: DepthModel,
    pub t_depth: f64,
    pub per_op_depth: f64,
    /// Unit-time evolutions or walk-operator applications.
    pub op_count: f64,
    pub synthesis_accuracy: Option<f64>,
    /// Total T-gate count where the model provides one.
    pub t_count: Option<f64>,
    /// The anchor does not cover this system size.
    pub out_of_model: bool,
}

/// Reference point for product-formula circuits: `t_count_ref` T gates and
/// depth `depth_ref` for evolution time `t_ref` on `n_ref` sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProductFormulaAnchor {
    pub depth_ref: f64,
    pub t_count_ref: f64,
    pub t_ref: f64,
    pub n_ref: usize,
}

impl Default for ProductFormulaAnchor {
    fn default() -> Self {
        Self {
            depth_ref: 1e7,
            t_count_ref: 1e9,
            t_ref: 100.0,
            n_ref: 100,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} = {x} must be positive and finite")));
    }
    Ok(())
}

/// Depth linear in evolution time from the anchor: `depth_ref * t / t_ref`.
pub fn tdepth_product_formula(t_total: f64, n_sites: usize, anchor: &ProductFormulaAnchor) -> Result<DepthEstimate> {
    positive("t_total", t_total)?;
    positive("depth_ref", anchor.depth_ref)?;
    positive("t_ref", anchor.t_ref)?;
    let per_op_depth = anchor.depth_ref / anchor.t_ref;
    Ok(DepthEstimate {
        model: DepthModel::ProductFormula,
        t_depth: per_op_depth * t_total,
        per_op_depth,
        op_count: t_total,
        synthesis_accuracy: None,
        t_count: Some(anchor.t_count_ref * t_total / anchor.t_ref),
        out_of_model: n_sites != anchor.n_ref,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogArgument {
    /// `2 * n_sites`
    Qubits,
    Sites,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkDepthSettings {
    pub log_argument: LogArgument,
    pub log_base: f64,
}

impl Default for WalkDepthSettings {
    fn default() -> Self {
        Self {
            log_argument: LogArgument::Qubits,
            log_base: 2.0,
        }
    }
}

/// `walk_ops * 3 log(N) log(1/eps)` with synthesis accuracy
/// `eps = sqrt(delta_min) / (100 n_sites^2)`.
pub fn tdepth_qubitized(
    walk_ops: f64,
    n_sites: usize,
    delta_min: f64,
    settings: &WalkDepthSettings,
) -> Result<DepthEstimate> {
    positive("walk_ops", walk_ops)?;
    positive("delta_min", delta_min)?;
    if n_sites == 0 {
        return Err(Error::InvalidParameter("n_sites must be positive".into()));
    }
    if !(settings.log_base > 1.0) {
        return Err(Error::InvalidParameter(format!("log base {} must exceed 1", settings.log_base)));
    }
    let n = n_sites as f64;
    let eps = delta_min.sqrt() / (100.0 * n * n);
    let arg = match settings.log_argument {
        LogArgument::Qubits => 2.0 * n,
        LogArgument::Sites => n,
    };
    let log = |x: f64| x.ln() / settings.log_base.ln();
    let per_op_depth = 3.0 * log(arg) * log(1.0 / eps);
    Ok(DepthEstimate {
        model: DepthModel::QubitizedWalk,
        t_depth: walk_ops * per_op_depth,
        per_op_depth,
        op_count: walk_ops,
        synthesis_accuracy: Some(eps),
        t_count: None,
        out_of_model: false,
    })
}

/// `tts_a / tts_b`
pub fn gain(tts_a: f64, tts_b: f64) -> Result<f64> {
    if !(tts_a > 0.0 && tts_b > 0.0) {
        return Err(Error::InvalidParameter(format!("gain needs positive costs, got {tts_a} and {tts_b}")));
    }
    Ok(tts_a / tts_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `a` in `tts ~ (1/delta)^a`
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln tts`.
    pub residual: f64,
    pub n_points: usize,
}

/// Least squares `ln tts = a ln(1/delta_min) + b`.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::SingularFit(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|(d, t)| !(*d > 0.0 && *t > 0.0 && d.is_finite() && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("fit point {p:?} is not positive")));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(d, t)| (-d.ln(), t.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return Err(Error::SingularFit("all minimal gaps are equal".into()));
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = xy.iter().map(|p| (p.1 - a * p.0 - b).powi(2)).sum();
    Ok(ScalingFit {
        exponent: a,
        intercept: b,
        residual: (rss / n).sqrt(),
        n_points: xy.len(),
    })
}
