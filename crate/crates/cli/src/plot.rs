//! CSV tables for external plotting.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use zenoprep_core::cost::{scaling_fit, CostModel, ScalingFit};
use zenoprep_core::model::LatticeShape;

use crate::report::Report;
use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const FITS_FILE: &str = "fits.csv";

const SUMMARY_HEADER: [&str; 13] = [
    "n_sites",
    "shape",
    "m",
    "k",
    "delta_min",
    "normalized_delta_min",
    "tts_plain",
    "tts_rewind",
    "tts_qubitized",
    "gain_rewind",
    "gain_qubitized",
    "tdepth_pf",
    "tdepth_qub",
];

const FIT_MODELS: [CostModel; 3] = [CostModel::Plain, CostModel::Rewind, CostModel::QubitizedGapmap];

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn shape_name(s: LatticeShape) -> &'static str {
    match s {
        LatticeShape::Chain => "chain",
        LatticeShape::Ladder => "ladder",
        LatticeShape::Rectangular => "rectangular",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyFit {
    pub shape: LatticeShape,
    pub k: usize,
    pub model: CostModel,
    pub fit: ScalingFit,
}

/// Power-law fits of TTS against `1 / delta_min`, per lattice family `(shape, k)`
/// and cost model, for families with at least two distinct gaps.
pub fn family_fits(reports: &[Report]) -> Vec<FamilyFit> {
    let mut families: BTreeMap<(usize, &'static str), Vec<&Report>> = BTreeMap::new();
    for r in reports {
        families
            .entry((r.instance.k, shape_name(r.instance.shape)))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for members in families.values() {
        for model in FIT_MODELS {
            let pts: Vec<(f64, f64)> = members
                .iter()
                .filter_map(|r| r.tts(model).map(|t| (r.delta_min, t)))
                .collect();
            if pts.len() < 2 {
                continue;
            }
            match scaling_fit(&pts) {
                Ok(fit) => out.push(FamilyFit {
                    shape: members[0].instance.shape,
                    k: members[0].instance.k,
                    model,
                    fit,
                }),
                Err(e) => log::warn!("no {model} fit for {} family: {e}", shape_name(members[0].instance.shape)),
            }
        }
    }
    out
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes the summary table (with fit footer), the fits table and one
/// schedule table per report and model. Returns the written paths.
pub fn emit_plot_data(reports: &[Report], out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if reports.is_empty() {
        return Err(CliError::Config("plot data needs at least one report".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut written = Vec::new();

    let summary = out_dir.join(SUMMARY_FILE);
    let fits = family_fits(reports);
    {
        let mut w = csv::Writer::from_path(&summary).map_err(csv_err(&summary))?;
        w.write_record(SUMMARY_HEADER).map_err(csv_err(&summary))?;
        for r in reports {
            let inst = &r.instance;
            let ratio = |a: CostModel, b: CostModel| Some(r.tts(a)? / r.tts(b)?);
            w.write_record([
                inst.n_sites.to_string(),
                shape_name(inst.shape).to_string(),
                inst.m.to_string(),
                inst.k.to_string(),
                r.delta_min.to_string(),
                r.normalized_delta_min.to_string(),
                cell(r.tts(CostModel::Plain)),
                cell(r.tts(CostModel::Rewind)),
                cell(r.tts(CostModel::QubitizedGapmap)),
                cell(ratio(CostModel::Plain, CostModel::Rewind)),
                cell(ratio(CostModel::Rewind, CostModel::QubitizedGapmap)),
                cell(r.depth(CostModel::Rewind).map(|d| d.t_depth)),
                cell(r.depth(CostModel::QubitizedGapmap).map(|d| d.t_depth)),
            ])
            .map_err(csv_err(&summary))?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", summary.display())))?;
    }
    // footer: comment lines, skipped by readers configured with comment char '#'
    let mut footer = String::new();
    for f in &fits {
        footer.push_str(&format!(
            "# fit shape={} k={} model={} exponent={} intercept={} residual={} n_points={}\n",
            shape_name(f.shape),
            f.k,
            f.model,
            f.fit.exponent,
            f.fit.intercept,
            f.fit.residual,
            f.fit.n_points
        ));
    }
    if !footer.is_empty() {
        use std::io::Write;
        let mut file = fs::OpenOptions::new()
            .append(true)
            .open(&summary)
            .map_err(|e| CliError::Io(format!("{}: {e}", summary.display())))?;
        file.write_all(footer.as_bytes())
            .map_err(|e| CliError::Io(format!("{}: {e}", summary.display())))?;
    }
    written.push(summary);

    let fits_path = out_dir.join(FITS_FILE);
    {
        let mut w = csv::Writer::from_path(&fits_path).map_err(csv_err(&fits_path))?;
        w.write_record(["shape", "k", "model", "exponent", "intercept", "residual", "n_points"])
            .map_err(csv_err(&fits_path))?;
        for f in &fits {
            w.write_record([
                shape_name(f.shape).to_string(),
                f.k.to_string(),
                f.model.to_string(),
                f.fit.exponent.to_string(),
                f.fit.intercept.to_string(),
                f.fit.residual.to_string(),
                f.fit.n_points.to_string(),
            ])
            .map_err(csv_err(&fits_path))?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", fits_path.display())))?;
    }
    written.push(fits_path);

    for r in reports {
        for m in &r.models {
            let path = out_dir.join(format!("schedule_{}_{}.csv", r.instance.label, m.model));
            let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
            w.write_record(["s", "fidelity", "gap", "normalized_gap", "e0", "e1"])
                .map_err(csv_err(&path))?;
            for p in &m.schedule {
                w.write_record([
                    p.s.to_string(),
                    cell(p.fidelity),
                    p.gap.to_string(),
                    p.normalized_gap.to_string(),
                    p.e0.to_string(),
                    p.e1.to_string(),
                ])
                .map_err(csv_err(&path))?;
            }
            w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
    }
    Ok(written)
}
