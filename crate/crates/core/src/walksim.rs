//! Monte Carlo checks of the measurement protocols: the two-level rewind
//! walk, restart and rewind sequences, and exact projective simulation on
//! small state vectors.
//!
//! Trial `i` draws from the ChaCha8 stream `i` of the run seed, so results do
//! not depend on scheduling or thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{validate_profile, walk_points};
use crate::error::{Error, Result};
use crate::schedule::ScheduleData;

/// Default cap on the sector dimension for exact projective simulation.
pub const EXACT_SIM_THRESHOLD: usize = 1024;

const MIN_SUCCESS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Restart,
    Rewind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkProfile {
    pub fidelities: Vec<f64>,
    /// `Delta_0..Delta_L`
    pub gaps: Vec<f64>,
    pub protocol: Protocol,
}

impl WalkProfile {
    pub fn from_schedule(data: &ScheduleData, protocol: Protocol) -> Self {
        Self {
            fidelities: data.fidelities.clone(),
            gaps: data.gaps(),
            protocol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_profile(&self.fidelities, &self.gaps)?;
        let p: f64 = self.fidelities.iter().product();
        let worst = match self.protocol {
            Protocol::Restart => p,
            Protocol::Rewind => self.fidelities.iter().copied().fold(1.0, f64::min),
        };
        if worst < MIN_SUCCESS {
            return Err(Error::InvalidParameter(format!(
                "success probability {worst:.3e} too small to simulate"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostHistogram {
    pub min: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub mean_cost: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub histogram: Option<CostHistogram>,
    /// Restart: fraction of runs through all steps that succeed. Rewind:
    /// fraction of trials where every first measurement succeeds.
    pub success_frequency: Option<f64>,
    pub success_std_error: Option<f64>,
    pub attempts: Option<u64>,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn run_trials<T: Send, F>(trials: u64, seed: u64, f: F) -> Vec<T>
where
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..trials as usize)
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| f(&mut trial_rng(seed, i as u64)))
        .collect()
}

fn summarize(costs: &[f64], seed: u64) -> McResult {
    let n = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let var = if costs.len() > 1 {
        costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = costs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((p * (n - 1.0)).round() as usize).min(sorted.len() - 1)];
    McResult {
        mean_cost: mean,
        std_error: (var / n).sqrt(),
        trials: costs.len() as u64,
        seed,
        histogram: Some(CostHistogram {
            min: sorted[0],
            p50: q(0.5),
            p90: q(0.9),
            p99: q(0.99),
            max: sorted[sorted.len() - 1],
        }),
        success_frequency: None,
        success_std_error: None,
        attempts: None,
    }
}

fn bernoulli(successes: u64, n: u64) -> (f64, f64) {
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    Ok(())
}

/// One rewind step starting in `psi_{j-1}`: measure `Q_j` (cost `c`); on
/// failure measure `Q_{j-1}` (cost `c_prev`) and try again. Returns the cost
/// and whether the first measurement succeeded.
fn rewind_walk(rng: &mut ChaCha8Rng, f: f64, c_prev: f64, c: f64) -> (f64, bool) {
    let mut cost = 0.0;
    let mut at_ground = true;
    let mut first = true;
    loop {
        cost += c;
        let p = if at_ground { f } else { 1.0 - f };
        if rng.random::<f64>() < p {
            return (cost, first);
        }
        first = false;
        cost += c_prev;
        at_ground = rng.random::<f64>() < 1.0 - f;
    }
}

pub fn simulate_rewind_step(f: f64, d_prev: f64, d: f64, trials: u64, seed: u64) -> Result<McResult> {
    check_trials(trials)?;
    WalkProfile {
        fidelities: vec![f],
        gaps: vec![d_prev, d],
        protocol: Protocol::Rewind,
    }
    .validate()?;
    let costs = run_trials(trials, seed, |rng| rewind_walk(rng, f, 1.0 / d_prev, 1.0 / d).0);
    Ok(summarize(&costs, seed))
}

pub fn simulate_sequence(profile: &WalkProfile, trials: u64, seed: u64) -> Result<McResult> {
    check_trials(trials)?;
    profile.validate()?;
    let costs_of: Vec<f64> = profile.gaps.iter().map(|g| 1.0 / g).collect();
    let fids = &profile.fidelities;
    let outcomes: Vec<(f64, u64, bool)> = match profile.protocol {
        Protocol::Restart => run_trials(trials, seed, |rng| {
            let mut cost = 0.0;
            let mut attempts = 0;
            loop {
                attempts += 1;
                let mut ok = true;
                for (j, f) in fids.iter().enumerate() {
                    cost += costs_of[j + 1];
                    if rng.random::<f64>() >= *f {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    return (cost, attempts, attempts == 1);
                }
            }
        }),
        Protocol::Rewind => run_trials(trials, seed, |rng| {
            let mut cost = 0.0;
            let mut clean = true;
            for (j, f) in fids.iter().enumerate() {
                let (c, first) = rewind_walk(rng, *f, costs_of[j], costs_of[j + 1]);
                cost += c;
                clean &= first;
            }
            (cost, 1, clean)
        }),
    };
    let costs: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let mut out = summarize(&costs, seed);
    let attempts: u64 = outcomes.iter().map(|o| o.1).sum();
    let (freq, err) = match profile.protocol {
        // each run either completes (once per trial) or fails
        Protocol::Restart => bernoulli(trials, attempts),
        Protocol::Rewind => bernoulli(outcomes.iter().filter(|o| o.2).count() as u64, trials),
    };
    out.success_frequency = Some(freq);
    out.success_std_error = Some(err);
    out.attempts = Some(attempts);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectiveSpace {
    /// Rank-1 projectors onto sector ground states.
    Sector,
    /// Rank-2 projectors onto ground walk eigenspaces.
    Qubitized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveConfig {
    pub trials: u64,
    pub seed: u64,
    pub protocol: Protocol,
    pub space: ProjectiveSpace,
    pub normalization: f64,
    pub max_dim: usize,
}

impl Default for ProjectiveConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 1,
            protocol: Protocol::Rewind,
            space: ProjectiveSpace::Sector,
            normalization: 2.0 * std::f64::consts::PI,
            max_dim: EXACT_SIM_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    /// Measurements of `Q_j` on a state inside the range of `Q_{j-1}`.
    pub from_previous: u64,
    pub from_previous_successes: u64,
    pub measurements: u64,
    pub successes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveOutcome {
    pub mc: McResult,
    pub steps: Vec<StepStats>,
    pub first_step_frequency: f64,
    pub first_step_std_error: f64,
    /// Overlap of the final state with the target range, worst and mean over trials.
    pub final_fidelity_min: f64,
    pub final_fidelity_mean: f64,
    /// Sector mode: weight of the failure state `Q̄_j psi_{j-1}` outside the first excited state.
    pub leakage: Option<Vec<f64>>,
}

struct Projector {
    basis: Vec<Vec<Complex64>>,
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl Projector {
    fn weight(&self, x: &[Complex64]) -> f64 {
        self.basis.iter().map(|q| cdot(q, x).norm_sqr()).sum::<f64>().clamp(0.0, 1.0)
    }

    /// Normalized post-measurement state for outcome `inside`.
    fn collapse(&self, x: &[Complex64], inside: bool) -> Vec<Complex64> {
        let mut p = vec![Complex64::new(0.0, 0.0); x.len()];
        for q in &self.basis {
            let c = cdot(q, x);
            for (pi, qi) in p.iter_mut().zip(q) {
                *pi += qi * c;
            }
        }
        let mut out: Vec<Complex64> = if inside {
            p
        } else {
            x.iter().zip(&p).map(|(a, b)| a - b).collect()
        };
        let n = out.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        out.iter_mut().for_each(|v| *v /= n);
        out
    }
}

fn complexify(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

struct TrialRecord {
    cost: f64,
    first_success: bool,
    final_fidelity: f64,
    steps: Vec<StepStats>,
}

/// Sequential binary measurements with true projectors on the full state.
pub fn simulate_exact_projective(data: &ScheduleData, cfg: &ProjectiveConfig) -> Result<ProjectiveOutcome> {
    check_trials(cfg.trials)?;
    let dim = data.points[0].ground().len();
    if dim > cfg.max_dim {
        return Err(Error::Capacity {
            what: "exact projective simulation dimension",
            requested: dim as u128,
            limit: cfg.max_dim as u128,
        });
    }
    let (projectors, costs, initial, leakage) = match cfg.space {
        ProjectiveSpace::Sector => {
            let proj: Vec<Projector> = data
                .points
                .iter()
                .map(|p| Projector {
                    basis: vec![complexify(p.ground())],
                })
                .collect();
            let leak = data
                .points
                .windows(2)
                .map(|w| {
                    let (prev, next) = (w[0].ground(), w[1].ground());
                    let ov: f64 = prev.iter().zip(next).map(|(a, b)| a * b).sum();
                    let mut bar: Vec<f64> = prev.iter().zip(next).map(|(a, b)| a - ov * b).collect();
                    let n = bar.iter().map(|x| x * x).sum::<f64>().sqrt();
                    match &w[1].spectral.excited {
                        Some(exc) if n > 1e-12 => {
                            bar.iter_mut().for_each(|x| *x /= n);
                            let c: f64 = bar.iter().zip(exc.iter()).map(|(a, b)| a * b).sum();
                            (1.0 - c * c).max(0.0)
                        }
                        _ => 0.0,
                    }
                })
                .collect();
            (proj, data.gaps().iter().map(|g| 1.0 / g).collect::<Vec<_>>(), complexify(data.points[0].ground()), Some(leak))
        }
        ProjectiveSpace::Qubitized => {
            let pts = walk_points(data, cfg.normalization)?;
            let proj = pts
                .iter()
                .map(|p| {
                    let (a, b) = p.eigenspace();
                    Projector { basis: vec![a, b] }
                })
                .collect();
            let costs = pts.iter().map(|p| 1.0 / p.walk_gap()).collect();
            let init = pts[0].a.clone();
            (proj, costs, init, None)
        }
    };
    let l = data.steps();
    let records: Vec<TrialRecord> = run_trials(cfg.trials, cfg.seed, |rng| {
        let mut steps = vec![StepStats::default(); l];
        let mut state = initial.clone();
        let mut j = 1;
        let mut cost = 0.0;
        let mut fresh = true;
        let mut first_success = None;
        while j <= l {
            let p = projectors[j].weight(&state);
            cost += costs[j];
            let ok = rng.random::<f64>() < p;
            let st = &mut steps[j - 1];
            st.measurements += 1;
            st.successes += ok as u64;
            if fresh {
                st.from_previous += 1;
                st.from_previous_successes += ok as u64;
            }
            first_success.get_or_insert(ok);
            state = projectors[j].collapse(&state, ok);
            if ok {
                j += 1;
                fresh = true;
                continue;
            }
            match cfg.protocol {
                Protocol::Restart => {
                    state = initial.clone();
                    j = 1;
                    fresh = true;
                }
                Protocol::Rewind => {
                    let back = &projectors[j - 1];
                    cost += costs[j - 1];
                    let inside = rng.random::<f64>() < back.weight(&state);
                    state = back.collapse(&state, inside);
                    fresh = inside;
                }
            }
        }
        TrialRecord {
            cost,
            first_success: first_success.unwrap_or(true),
            final_fidelity: projectors[l].weight(&state),
            steps,
        }
    });
    let trial_costs: Vec<f64> = records.iter().map(|r| r.cost).collect();
    let mut mc = summarize(&trial_costs, cfg.seed);
    let mut steps = vec![StepStats::default(); l];
    for r in &records {
        for (acc, s) in steps.iter_mut().zip(&r.steps) {
            acc.from_previous += s.from_previous;
            acc.from_previous_successes += s.from_previous_successes;
            acc.measurements += s.measurements;
            acc.successes += s.successes;
        }
    }
    let (freq, err) = bernoulli(records.iter().filter(|r| r.first_success).count() as u64, cfg.trials);
    mc.attempts = Some(steps.iter().map(|s| s.measurements).sum());
    let fids: Vec<f64> = records.iter().map(|r| r.final_fidelity).collect();
    Ok(ProjectiveOutcome {
        mc,
        steps,
        first_step_frequency: freq,
        first_step_std_error: err,
        final_fidelity_min: fids.iter().copied().fold(1.0, f64::min),
        final_fidelity_mean: fids.iter().sum::<f64>() / fids.len() as f64,
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::rewind_step_chain;
    use crate::model::build_lattice;
    use crate::schedule::{Evaluator, Instance};
    use crate::spectral::SpectralConfig;

    #[test]
    fn deterministic_step() {
        let r = simulate_rewind_step(1.0, 1.0, 0.25, 1000, 3).unwrap();
        assert_eq!(r.mean_cost, 4.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn same_seed_same_result() {
        let a = simulate_rewind_step(0.6, 0.8, 1.1, 5000, 42).unwrap();
        let b = simulate_rewind_step(0.6, 0.8, 1.1, 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_rewind_step(0.6, 0.8, 1.1, 5000, 43).unwrap();
        assert_ne!(a.mean_cost, c.mean_cost);
    }

    #[test]
    fn step_matches_chain() {
        let r = simulate_rewind_step(0.5, 1.0, 1.0, 200_000, 7).unwrap();
        let c = rewind_step_chain(0.5, 1.0, 1.0).unwrap();
        assert!((r.mean_cost - c).abs() < 3.0 * r.std_error, "{} vs {c}", r.mean_cost);
    }

    #[test]
    fn sequences_with_certain_success() {
        for protocol in [Protocol::Restart, Protocol::Rewind] {
            let p = WalkProfile {
                fidelities: vec![1.0, 1.0],
                gaps: vec![2.0, 0.5, 0.25],
                protocol,
            };
            let r = simulate_sequence(&p, 100, 1).unwrap();
            assert_eq!(r.mean_cost, 6.0);
            assert_eq!(r.success_frequency, Some(1.0));
        }
    }

    #[test]
    fn restart_geometric_mean() {
        let p = WalkProfile {
            fidelities: vec![0.5],
            gaps: vec![1.0, 1.0],
            protocol: Protocol::Restart,
        };
        let r = simulate_sequence(&p, 200_000, 11).unwrap();
        assert!((r.mean_cost - 2.0).abs() < 3.0 * r.std_error);
        let (f, e) = (r.success_frequency.unwrap(), r.success_std_error.unwrap());
        assert!((f - 0.5).abs() < 3.0 * e);
    }

    #[test]
    fn restart_costs_more_than_rewind() {
        let fids = vec![0.3, 0.2, 0.4];
        let gaps = vec![1.0; 4];
        let run = |protocol| {
            simulate_sequence(&WalkProfile { fidelities: fids.clone(), gaps: gaps.clone(), protocol }, 50_000, 5)
                .unwrap()
                .mean_cost
        };
        assert!(run(Protocol::Restart) > run(Protocol::Rewind));
    }

    #[test]
    fn rejects_hopeless_profiles() {
        let p = WalkProfile {
            fidelities: vec![0.0],
            gaps: vec![1.0, 1.0],
            protocol: Protocol::Rewind,
        };
        assert!(simulate_sequence(&p, 10, 1).is_err());
        assert!(simulate_rewind_step(0.5, 1.0, 1.0, 0, 1).is_err());
    }

    fn chain_schedule(m: usize, s: &[f64]) -> ScheduleData {
        let inst = Instance::new(build_lattice(m, 1).unwrap(), None, 0.1).unwrap();
        Evaluator::new(inst, SpectralConfig::default()).unwrap().evaluate_schedule(s).unwrap()
    }

    #[test]
    fn projective_first_step_and_final_fidelity() {
        let d = chain_schedule(3, &[0.0, 0.5, 1.0]);
        let out = simulate_exact_projective(&d, &ProjectiveConfig::default()).unwrap();
        let f1 = d.fidelities[0];
        assert!((out.first_step_frequency - f1).abs() < 3.0 * out.first_step_std_error.max(1e-3));
        assert!((out.final_fidelity_min - 1.0).abs() < 1e-10);
        assert_eq!(out.leakage.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn projective_repeated_point_always_succeeds() {
        let d = chain_schedule(3, &[0.0, 0.5, 0.5, 1.0]);
        let out = simulate_exact_projective(&d, &ProjectiveConfig::default()).unwrap();
        let s = out.steps[1];
        assert_eq!(s.from_previous, s.from_previous_successes);
        assert!(s.from_previous > 0);
    }

    #[test]
    fn projective_restart_and_qubitized() {
        let d = chain_schedule(3, &[0.0, 1.0]);
        let cfg = ProjectiveConfig {
            protocol: Protocol::Restart,
            trials: 2000,
            ..ProjectiveConfig::default()
        };
        let out = simulate_exact_projective(&d, &cfg).unwrap();
        assert!((out.final_fidelity_min - 1.0).abs() < 1e-10);
        let q = ProjectiveConfig {
            space: ProjectiveSpace::Qubitized,
            trials: 2000,
            ..ProjectiveConfig::default()
        };
        let out = simulate_exact_projective(&d, &q).unwrap();
        assert!((out.final_fidelity_min - 1.0).abs() < 1e-10);
        assert!(out.leakage.is_none());
    }

    #[test]
    fn projective_capacity() {
        let d = chain_schedule(4, &[0.0, 1.0]);
        let cfg = ProjectiveConfig {
            max_dim: 10,
            ..ProjectiveConfig::default()
        };
        assert!(matches!(simulate_exact_projective(&d, &cfg), Err(Error::Capacity { .. })));
    }
}
