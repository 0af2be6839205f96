use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use zenoprep_core::cost::{
    evaluate, rewind_step_chain, tdepth_product_formula, tdepth_qubitized, CostModel, CostReport,
    ProductFormulaAnchor, WalkDepthSettings,
};
use zenoprep_core::walksim::{
    simulate_exact_projective, simulate_rewind_step, simulate_sequence, McResult, ProjectiveConfig, ProjectiveOutcome,
    ProjectiveSpace, Protocol, WalkProfile,
};

use zenoprep::config::{McConfig, RunConfig};
use zenoprep::pipeline::Pipeline;
use zenoprep::plot::emit_plot_data;
use zenoprep::report::{schedule_rows, Report, ScheduleRow};
use zenoprep::CliError;

#[derive(Parser)]
#[command(name = "zenoprep", version, about = "Measurement-driven adiabatic state preparation estimates for the Hubbard model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground and first excited state at one interpolation point.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        s: f64,
    },
    /// Optimize schedules for each cost model and write a report.
    Schedule {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate the cost models on a given schedule.
    Cost {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated s values from 0 to 1.
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<f64>,
    },
    /// Monte Carlo check of the measurement protocols.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated s values; omit to simulate a single rewind step.
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<f64>,
        /// Single rewind step `F,delta_prev,delta`.
        #[arg(long, value_delimiter = ',')]
        step: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ProtocolArg::Rewind)]
        protocol: ProtocolArg,
        /// Also run exact projective simulation.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = SpaceArg::Sector)]
        space: SpaceArg,
    },
    /// T-depth estimates.
    Tdepth {
        /// Total evolution time for the product-formula model.
        #[arg(long)]
        t: Option<f64>,
        /// Walk-operator applications for the qubitized model.
        #[arg(long)]
        walk_ops: Option<f64>,
        /// Minimum normalized gap for the synthesis accuracy.
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        n_sites: usize,
    },
    /// Run the pipeline over several lattices and write reports plus plot data.
    Scan {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated lattice lengths m, all with width --k.
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// CSV tables from saved reports.
    PlotData {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Restart,
    Rewind,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Sector,
    Qubitized,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON run configuration; flags override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    doping: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated cost models.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_points: Option<usize>,
    #[arg(long)]
    min_step: Option<f64>,
    /// Eigensolver residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_dim: Option<usize>,
    /// Monte Carlo trials; enables validation in `schedule` and `scan`.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => {
                let m = self
                    .m
                    .ok_or_else(|| CliError::Config("give --config or --m".into()))?;
                RunConfig::new(m, self.k.unwrap_or(1))
            }
        };
        if let Some(m) = self.m {
            cfg.lattice.m = m;
        }
        if let Some(k) = self.k {
            cfg.lattice.k = k;
        }
        if self.u.is_some() {
            cfg.u_override = self.u;
        }
        if let Some(d) = self.doping {
            cfg.doping = d;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if !self.models.is_empty() {
            cfg.cost_models = self
                .models
                .iter()
                .map(|m| m.parse::<CostModel>().map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<_, _>>()?;
        }
        if let Some(p) = self.patience {
            cfg.optimizer.patience = p;
        }
        if let Some(p) = self.max_points {
            cfg.optimizer.max_points = p;
        }
        if let Some(p) = self.min_step {
            cfg.optimizer.min_step = p;
        }
        if let Some(t) = self.tol {
            cfg.spectral.tol = t;
        }
        if let Some(d) = self.max_dim {
            cfg.max_dim = d;
        }
        if self.trials.is_some() || self.seed.is_some() {
            let mut mc = cfg.mc.unwrap_or_default();
            if let Some(t) = self.trials {
                mc.trials = t;
            }
            if let Some(s) = self.seed {
                mc.seed = s;
            }
            cfg.mc = Some(mc);
        }
        if let Some(dir) = &self.cache_dir {
            cfg.cache_dir = Some(dir.clone());
        } else if let Some(dir) = std::env::var_os(zenoprep::config::CACHE_ENV) {
            cfg.cache_dir = Some(PathBuf::from(dir));
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn pipeline(&self) -> Result<Pipeline, CliError> {
        Pipeline::new(self.config()?, !self.no_cache)
    }
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SpectrumOut {
    instance: String,
    dim: usize,
    s: f64,
    e0: f64,
    e1: f64,
    gap: f64,
    e_max: f64,
    normalized_gap: f64,
    method: zenoprep_core::spectral::SolveMethod,
    residuals: zenoprep_core::spectral::Residuals,
}

#[derive(Serialize)]
struct CostOut {
    instance: String,
    schedule: Vec<ScheduleRow>,
    costs: Vec<CostReport>,
    skipped: Vec<(CostModel, String)>,
}

#[derive(Serialize)]
struct StepOut {
    fidelity: f64,
    delta_prev: f64,
    delta: f64,
    chain: f64,
    mc: McResult,
    z_score: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    instance: String,
    schedule: Vec<ScheduleRow>,
    sequence: McResult,
    projective: Option<ProjectiveOutcome>,
}

#[derive(Serialize)]
struct ScanOut {
    reports: Vec<PathBuf>,
    plot_files: Vec<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { run, s } => {
            let p = run.pipeline()?;
            let label = p.config.lattice_label();
            let pt = p
                .evaluator
                .evaluate_point(s)
                .map_err(|e| CliError::stage("spectrum", format!("{label} s={s}"), e))?;
            let out = SpectrumOut {
                instance: p.evaluator.instance().fingerprint(),
                dim: p.evaluator.dim(),
                s: pt.s,
                e0: pt.spectral.e0,
                e1: pt.spectral.e1,
                gap: pt.spectral.gap,
                e_max: pt.e_max,
                normalized_gap: pt.normalized_gap,
                method: pt.spectral.method,
                residuals: pt.spectral.residuals,
            };
            emit(&out, p.config.output.as_deref())
        }
        Command::Schedule { run } => {
            let p = run.pipeline()?;
            let report = p.run()?;
            emit(&report, p.config.output.as_deref())
        }
        Command::Cost { run, schedule } => {
            let p = run.pipeline()?;
            let label = p.config.lattice_label();
            let data = p
                .evaluator
                .evaluate_schedule(&schedule)
                .map_err(|e| CliError::stage("evaluate schedule", label.clone(), e))?;
            let settings = p.config.cost_settings();
            let mut costs = Vec::new();
            let mut skipped = Vec::new();
            for &m in &p.config.cost_models {
                match evaluate(m, &data, &settings) {
                    Ok(r) => costs.push(r),
                    Err(e @ (zenoprep_core::Error::Domain(_) | zenoprep_core::Error::Capacity { .. }))
                        if m == CostModel::QubitizedExact =>
                    {
                        skipped.push((m, e.to_string()))
                    }
                    Err(e) => return Err(CliError::stage("evaluate cost", format!("{label} model={m}"), e)),
                }
            }
            let out = CostOut {
                instance: p.evaluator.instance().fingerprint(),
                schedule: schedule_rows(&data),
                costs,
                skipped,
            };
            emit(&out, p.config.output.as_deref())
        }
        Command::Simulate {
            run,
            schedule,
            step,
            protocol,
            exact,
            space,
        } => {
            let mc = McConfig {
                trials: run.trials.unwrap_or(McConfig::default().trials),
                seed: run.seed.unwrap_or(McConfig::default().seed),
                ..McConfig::default()
            };
            if schedule.is_empty() {
                if step.len() != 3 {
                    return Err(CliError::Config("give --schedule or --step F,delta_prev,delta".into()));
                }
                let (f, dp, d) = (step[0], step[1], step[2]);
                let r = simulate_rewind_step(f, dp, d, mc.trials, mc.seed)?;
                let chain = rewind_step_chain(f, dp, d)?;
                let z = if r.std_error > 0.0 {
                    (r.mean_cost - chain) / r.std_error
                } else {
                    0.0
                };
                let out = StepOut {
                    fidelity: f,
                    delta_prev: dp,
                    delta: d,
                    chain,
                    mc: r,
                    z_score: z,
                };
                return emit(&out, run.output.as_deref());
            }
            let p = run.pipeline()?;
            let label = p.config.lattice_label();
            let data = p
                .evaluator
                .evaluate_schedule(&schedule)
                .map_err(|e| CliError::stage("evaluate schedule", label.clone(), e))?;
            let protocol = match protocol {
                ProtocolArg::Restart => Protocol::Restart,
                ProtocolArg::Rewind => Protocol::Rewind,
            };
            let sequence = simulate_sequence(&WalkProfile::from_schedule(&data, protocol), mc.trials, mc.seed)
                .map_err(|e| CliError::stage("simulate sequence", label.clone(), e))?;
            let projective = if exact {
                let cfg = ProjectiveConfig {
                    trials: mc.trials,
                    seed: mc.seed,
                    protocol,
                    space: match space {
                        SpaceArg::Sector => ProjectiveSpace::Sector,
                        SpaceArg::Qubitized => ProjectiveSpace::Qubitized,
                    },
                    normalization: p.config.qubitization.normalization,
                    max_dim: mc.exact_sim_threshold,
                };
                Some(simulate_exact_projective(&data, &cfg).map_err(|e| CliError::stage("simulate projective", label, e))?)
            } else {
                None
            };
            let out = SimulateOut {
                instance: p.evaluator.instance().fingerprint(),
                schedule: schedule_rows(&data),
                sequence,
                projective,
            };
            emit(&out, p.config.output.as_deref())
        }
        Command::Tdepth {
            t,
            walk_ops,
            delta,
            n_sites,
        } => {
            if t.is_none() && walk_ops.is_none() {
                return Err(CliError::Config("give --t and/or --walk-ops".into()));
            }
            let mut out = Vec::new();
            if let Some(t) = t {
                out.push(tdepth_product_formula(t, n_sites, &ProductFormulaAnchor::default())?);
            }
            if let Some(w) = walk_ops {
                out.push(tdepth_qubitized(w, n_sites, delta, &WalkDepthSettings::default())?);
            }
            emit(&out, None)
        }
        Command::Scan { run, m_list, out_dir } => {
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
            let mut reports = Vec::new();
            let mut paths = Vec::new();
            for m in m_list {
                let mut args = run.clone();
                args.m = Some(m);
                args.output = None;
                let report = args.pipeline()?.run()?;
                let path = out_dir.join(format!("report_{}.json", report.instance.label));
                report.write(&path)?;
                log::info!("wrote {}", path.display());
                paths.push(path);
                reports.push(report);
            }
            let plot_files = emit_plot_data(&reports, &out_dir)?;
            emit(&ScanOut { reports: paths, plot_files }, None)
        }
        Command::PlotData { reports, out_dir } => {
            let reports = reports.iter().map(|p| Report::load(p)).collect::<Result<Vec<_>, _>>()?;
            let files = emit_plot_data(&reports, &out_dir)?;
            emit(&files, None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
