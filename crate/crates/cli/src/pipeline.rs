//! Instance → per-model schedule optimization → costs, gains, depths → Monte Carlo checks.

use std::sync::Arc;
use std::time::Instant;

use zenoprep_core::cost::{
    evaluate, tdepth_product_formula, tdepth_qubitized, CostModel, MAX_EXACT_SITES,
};
use zenoprep_core::schedule::{Evaluator, Optimized, ScheduleData};
use zenoprep_core::walksim::{
    simulate_exact_projective, simulate_sequence, ProjectiveConfig, ProjectiveSpace, Protocol, WalkProfile,
};
use zenoprep_core::Error;

use crate::cache::DiskCache;
use crate::config::{McConfig, RunConfig, SCHEMA_VERSION};
use crate::report::{
    schedule_rows, DepthRecord, Gain, InstanceInfo, McSummary, ModelResult, ProjectiveCheck, Report, SequenceCheck,
    SkippedModel,
};
use crate::CliError;

pub struct Pipeline {
    pub config: RunConfig,
    pub evaluator: Evaluator,
    pub cache: Option<Arc<DiskCache>>,
}

impl Pipeline {
    /// Validates the configuration and opens the cache; no eigensolves yet.
    pub fn new(config: RunConfig, use_cache: bool) -> Result<Self, CliError> {
        config.validate()?;
        let instance = config.instance()?;
        let evaluator = Evaluator::with_options(instance, config.spectral.clone(), config.margin, config.max_dim)
            .map_err(|e| CliError::stage("build instance", config.lattice_label(), e))?;
        let (evaluator, cache) = if use_cache {
            let dir = config.resolved_cache_dir();
            let cache = DiskCache::open(&dir).map_err(|e| CliError::Io(format!("cache dir {}: {e}", dir.display())))?;
            (evaluator.with_store(cache.clone()), Some(cache))
        } else {
            (evaluator, None)
        };
        Ok(Self {
            config,
            evaluator,
            cache,
        })
    }

    pub fn optimize(&self, model: CostModel) -> Result<Optimized, Error> {
        let settings = self.config.cost_settings();
        let cost = move |d: &ScheduleData| evaluate(model, d, &settings).map(|r| r.tts);
        self.evaluator.optimize(&cost, &self.config.optimizer)
    }

    fn instance_info(&self) -> InstanceInfo {
        let inst = self.evaluator.instance();
        InstanceInfo {
            label: inst.lattice.label(),
            shape: inst.lattice.shape(),
            m: inst.lattice.m,
            k: inst.lattice.k,
            n_sites: inst.lattice.n_sites,
            t_hop: inst.t_hop,
            u: inst.u,
            n_up: inst.sector.n_up,
            n_down: inst.sector.n_down,
            dim: self.evaluator.dim(),
            fingerprint: inst.fingerprint(),
        }
    }

    pub fn run(&self) -> Result<Report, CliError> {
        let start = Instant::now();
        let cfg = &self.config;
        let label = cfg.lattice_label();
        let settings = cfg.cost_settings();
        let mut models = Vec::new();
        let mut skipped = Vec::new();
        let mut visited: Vec<f64> = Vec::new();
        let mut best: Vec<(CostModel, ScheduleData)> = Vec::new();
        let n_sites = self.evaluator.instance().lattice.n_sites;
        for &model in &cfg.cost_models {
            if model == CostModel::QubitizedExact && n_sites > MAX_EXACT_SITES {
                skipped.push(SkippedModel {
                    model,
                    reason: format!("exact walk construction limited to {MAX_EXACT_SITES} sites"),
                });
                continue;
            }
            let opt = match self.optimize(model) {
                Ok(o) => o,
                Err(Error::Domain(msg)) if model == CostModel::QubitizedExact => {
                    log::warn!("{model} not applicable to {label}: {msg}");
                    skipped.push(SkippedModel { model, reason: msg });
                    continue;
                }
                Err(e) => return Err(CliError::stage("optimize", format!("{label} model={model}"), e)),
            };
            let cost = evaluate(model, &opt.best, &settings)
                .map_err(|e| CliError::stage("evaluate cost", format!("{label} model={model}"), e))?;
            visited.extend(opt.trace.iter().filter_map(|t| t.inserted_s));
            models.push(ModelResult {
                model,
                schedule: schedule_rows(&opt.best),
                cost,
                initial_tts: opt.trace[0].cost,
                trace: opt.trace,
                stop: opt.stop,
            });
            best.push((model, opt.best));
        }
        visited.extend([0.0, 1.0]);
        visited.sort_by(f64::total_cmp);
        visited.dedup();
        let all = self
            .evaluator
            .evaluate_schedule(&visited)
            .map_err(|e| CliError::stage("evaluate trajectory", label.clone(), e))?;

        let mut gains = Vec::new();
        for a in &models {
            for b in &models {
                if a.model != b.model {
                    gains.push(Gain {
                        baseline: a.model,
                        improved: b.model,
                        gain: a.cost.tts / b.cost.tts,
                        units: (a.cost.units, b.cost.units),
                    });
                }
            }
        }

        let mut depths = Vec::new();
        let dstage = |e| CliError::stage("tdepth", label.clone(), e);
        let tts = |m| models.iter().find(|r| r.model == m).map(|r| r.cost.tts).filter(|t| t.is_finite());
        if let Some(t) = tts(CostModel::Rewind) {
            depths.push(DepthRecord {
                source: CostModel::Rewind,
                estimate: tdepth_product_formula(t, n_sites, &cfg.depth.product_formula).map_err(dstage)?,
            });
        }
        for m in [CostModel::QubitizedGapmap, CostModel::QubitizedExact] {
            if let Some(t) = tts(m) {
                depths.push(DepthRecord {
                    source: m,
                    estimate: tdepth_qubitized(t, n_sites, all.min_normalized_gap(), &cfg.depth.walk).map_err(dstage)?,
                });
            }
        }

        let mc = match &cfg.mc {
            Some(mc) => Some(self.monte_carlo(mc, &best)?),
            None => None,
        };

        Ok(Report {
            schema_version: SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            instance: self.instance_info(),
            delta_min: all.min_gap(),
            normalized_delta_min: all.min_normalized_gap(),
            models,
            skipped_models: skipped,
            gains,
            depths,
            mc,
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    }

    fn monte_carlo(&self, mc: &McConfig, best: &[(CostModel, ScheduleData)]) -> Result<McSummary, CliError> {
        let label = self.config.lattice_label();
        let stage = |op: &'static str| {
            let label = label.clone();
            move |e| CliError::stage(op, label, e)
        };
        let mut sequences = Vec::new();
        for (model, data) in best {
            let protocol = match model {
                CostModel::Plain => Protocol::Restart,
                CostModel::Rewind => Protocol::Rewind,
                _ => continue,
            };
            let profile = WalkProfile::from_schedule(data, protocol);
            let r = match simulate_sequence(&profile, mc.trials, mc.seed) {
                Ok(r) => r,
                Err(Error::InvalidParameter(msg)) => {
                    log::warn!("skipping {model} Monte Carlo: {msg}");
                    continue;
                }
                Err(e) => return Err(stage("simulate sequence")(e)),
            };
            let p: f64 = data.fidelities.iter().product();
            let (expected_cost, z) = match protocol {
                Protocol::Rewind => {
                    let chain = evaluate(CostModel::Rewind, data, &Default::default())
                        .map_err(stage("evaluate cost"))?
                        .tts;
                    (Some(chain), z_score(r.mean_cost, chain, r.std_error))
                }
                Protocol::Restart => {
                    let f = r.success_frequency.unwrap_or(0.0);
                    let sigma = (p * (1.0 - p) / r.attempts.unwrap_or(1) as f64).sqrt();
                    (None, z_score(f, p, sigma))
                }
            };
            sequences.push(SequenceCheck {
                model: *model,
                protocol,
                mc: r,
                expected_cost,
                expected_success: p,
                z_score: z,
            });
        }
        let (mut projective, mut projective_skipped) = (None, None);
        if mc.exact {
            if let Some((model, data)) = best.iter().find(|(m, _)| *m == CostModel::Rewind) {
                let dim = self.evaluator.dim();
                if dim > mc.exact_sim_threshold {
                    projective_skipped = Some(format!("dimension {dim} above {}", mc.exact_sim_threshold));
                } else {
                    let pc = ProjectiveConfig {
                        trials: mc.trials,
                        seed: mc.seed,
                        protocol: Protocol::Rewind,
                        space: ProjectiveSpace::Sector,
                        normalization: self.config.qubitization.normalization,
                        max_dim: mc.exact_sim_threshold,
                    };
                    let out = simulate_exact_projective(data, &pc).map_err(stage("simulate projective"))?;
                    projective = Some(ProjectiveCheck {
                        model: *model,
                        mc: out.mc,
                        first_step_frequency: out.first_step_frequency,
                        first_step_std_error: out.first_step_std_error,
                        expected_first_step: data.fidelities[0],
                        final_fidelity_min: out.final_fidelity_min,
                        steps: out.steps,
                        leakage: out.leakage,
                    });
                }
            }
        }
        Ok(McSummary {
            sequences,
            projective,
            projective_skipped,
        })
    }
}

fn z_score(x: f64, expected: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        (x - expected) / sigma
    } else if x == expected {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn run_pipeline(config: RunConfig, use_cache: bool) -> Result<Report, CliError> {
    Pipeline::new(config, use_cache)?.run()
}
