//! Interpolation schedules `0 = s_0 < s_1 < ... < s_L = 1`, their spectral
//! data, and the midpoint-refinement optimizer.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    default_coupling, doped_sector, HubbardParams, HubbardSector, LatticeSpec, SectorSpec,
    DEFAULT_MAX_DIM,
};
use crate::spectral::{EigenBackend, ExactDiagonalization, SpectralConfig, SpectralPoint, WindowMap};

/// One Hubbard problem: the lattice, couplings and particle-number sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub lattice: LatticeSpec,
    pub t_hop: f64,
    pub u: f64,
    pub sector: SectorSpec,
}

impl Instance {
    /// Default coupling unless `u` is given, doped sector.
    pub fn new(lattice: LatticeSpec, u: Option<f64>, doping: f64) -> Result<Self> {
        let sector = doped_sector(lattice.n_sites, doping)?;
        Self::with_sector(lattice, u, sector)
    }

    pub fn with_sector(lattice: LatticeSpec, u: Option<f64>, sector: SectorSpec) -> Result<Self> {
        let u = u.unwrap_or_else(|| default_coupling(&lattice));
        HubbardParams::new(u, 0.0).validate()?;
        if sector.n_sites != lattice.n_sites {
            return Err(Error::InvalidSector(format!(
                "sector has {} sites, lattice {}",
                sector.n_sites, lattice.n_sites
            )));
        }
        Ok(Self {
            lattice,
            t_hop: 1.0,
            u,
            sector,
        })
    }

    pub fn params(&self, s: f64) -> HubbardParams {
        HubbardParams {
            t_hop: self.t_hop,
            u: self.u,
            s,
        }
    }

    /// Stable textual identity, used for cache keys.
    pub fn fingerprint(&self) -> String {
        format!(
            "{} t_hop={:?} u={:?} sector=({},{})",
            self.lattice.label(),
            self.t_hop,
            self.u,
            self.sector.n_up,
            self.sector.n_down
        )
    }
}

#[derive(Debug, Clone)]
pub struct SchedulePoint {
    pub s: f64,
    pub spectral: SpectralPoint,
    pub e_max: f64,
    /// Map of this point's spectrum onto `[margin, 2 pi - margin]`.
    pub window: WindowMap,
    pub normalized_gap: f64,
}

impl SchedulePoint {
    pub fn ground(&self) -> &[f64] {
        &self.spectral.ground
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleData {
    pub instance: Instance,
    pub points: Vec<SchedulePoint>,
    /// `fidelities[j - 1] = |<psi_{j-1}|psi_j>|^2` for `j = 1..=L`.
    pub fidelities: Vec<f64>,
}

impl ScheduleData {
    /// Number of steps `L`.
    pub fn steps(&self) -> usize {
        self.fidelities.len()
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.s).collect()
    }

    /// Raw gaps `Delta_0..Delta_L`.
    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.spectral.gap).collect()
    }

    pub fn normalized_gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.normalized_gap).collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn min_normalized_gap(&self) -> f64 {
        self.normalized_gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.iter().copied().fold(1.0, f64::min)
    }

    pub fn success_probability(&self) -> f64 {
        self.fidelities.iter().product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerPolicy {
    /// Consecutive non-improving refinements before stopping.
    pub patience: usize,
    pub max_points: usize,
    pub min_step: f64,
    pub epsilon: f64,
}

impl Default for OptimizerPolicy {
    fn default() -> Self {
        Self {
            patience: 5,
            max_points: 512,
            min_step: 1e-6,
            epsilon: 0.01,
        }
    }
}

impl OptimizerPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.patience < 1 || !(self.min_step > 0.0) || self.max_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "optimizer needs patience >= 1, min_step > 0, max_points >= 2: {self:?}"
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence epsilon {} outside (0, 1)",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    MaxPoints,
    StepFloor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `None` for the initial two-point schedule.
    pub inserted_s: Option<f64>,
    /// Step `j` (1-based) whose fidelity was the minimum.
    pub refined_step: Option<usize>,
    /// Fidelity of the refined step before the insertion.
    pub refined_fidelity: Option<f64>,
    /// Minimum fidelity of the schedule that was refined.
    pub min_fidelity: f64,
    pub n_points: usize,
    pub cost: f64,
    pub best_cost: f64,
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub best: ScheduleData,
    pub best_cost: f64,
    pub trace: Vec<TraceEntry>,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub data: ScheduleData,
    pub step: usize,
    pub inserted_s: f64,
}

/// Step to split and the midpoint to insert: the lowest fidelity, ties to the
/// smallest `j`.
pub fn refine_target(s: &[f64], fidelities: &[f64], min_step: f64) -> Result<(usize, f64)> {
    if fidelities.is_empty() || s.len() != fidelities.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} points with {} fidelities",
            s.len(),
            fidelities.len()
        )));
    }
    let mut k = 0;
    for (j, f) in fidelities.iter().enumerate() {
        if *f < fidelities[k] {
            k = j;
        }
    }
    let (lo, hi) = (s[k], s[k + 1]);
    if hi - lo < 2.0 * min_step {
        return Err(Error::StepFloor { lo, hi, min_step });
    }
    Ok((k + 1, 0.5 * (lo + hi)))
}

/// Cache lookup key for persisted points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointKey {
    pub instance: String,
    pub s: f64,
    pub solver: String,
}

/// Persistent backing store for evaluated points.
pub trait PointStore: Send + Sync {
    fn load(&self, key: &PointKey) -> Option<SchedulePoint>;
    fn store(&self, key: &PointKey, point: &SchedulePoint);
}

type Cell = Arc<OnceLock<Result<Arc<SchedulePoint>>>>;

/// Evaluates points of one instance, memoizing by `s`.
pub struct Evaluator {
    instance: Instance,
    hubbard: HubbardSector,
    spectral: SpectralConfig,
    margin: f64,
    backend: Arc<dyn EigenBackend>,
    store: Option<Arc<dyn PointStore>>,
    memo: Mutex<HashMap<u64, Cell>>,
    solves: AtomicUsize,
}

impl std::fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Evaluator")
            .field("instance", &self.instance.fingerprint())
            .field("backend", &self.backend.name())
            .field("solves", &self.solves())
            .finish()
    }
}

pub const DEFAULT_MARGIN: f64 = 0.1;

impl Evaluator {
    pub fn new(instance: Instance, spectral: SpectralConfig) -> Result<Self> {
        Self::with_options(instance, spectral, DEFAULT_MARGIN, DEFAULT_MAX_DIM)
    }

    pub fn with_options(
        instance: Instance,
        spectral: SpectralConfig,
        margin: f64,
        max_dim: usize,
    ) -> Result<Self> {
        spectral.validate()?;
        WindowMap::new((0.0, 1.0), margin)?;
        let hubbard = HubbardSector::with_capacity(&instance.lattice, instance.sector, max_dim)?;
        if hubbard.dim() < 2 {
            return Err(Error::InvalidSector(format!(
                "sector {:?} has dimension {}, no gap to follow",
                instance.sector,
                hubbard.dim()
            )));
        }
        Ok(Self {
            instance,
            hubbard,
            spectral,
            margin,
            backend: Arc::new(ExactDiagonalization),
            store: None,
            memo: Mutex::new(HashMap::new()),
            solves: AtomicUsize::new(0),
        })
    }

    pub fn with_backend(mut self, backend: Arc<dyn EigenBackend>) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_store(mut self, store: Arc<dyn PointStore>) -> Self {
        self.store = Some(store);
        self
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn hubbard(&self) -> &HubbardSector {
        &self.hubbard
    }

    pub fn spectral_config(&self) -> &SpectralConfig {
        &self.spectral
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn dim(&self) -> usize {
        self.hubbard.dim()
    }

    /// Eigensolves performed so far (cache hits excluded).
    pub fn solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    /// Identity of the solver settings; results under another fingerprint are never reused.
    pub fn solver_fingerprint(&self) -> String {
        format!("{} {:?} margin={:?}", self.backend.name(), self.spectral, self.margin)
    }

    fn key(&self, s: f64) -> PointKey {
        PointKey {
            instance: self.instance.fingerprint(),
            s,
            solver: self.solver_fingerprint(),
        }
    }

    pub fn evaluate_point(&self, s: f64) -> Result<Arc<SchedulePoint>> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("s = {s} outside [0, 1]")));
        }
        // folds -0.0 into 0.0
        let s = s + 0.0;
        let cell = {
            let mut memo = self.memo.lock().expect("memo lock poisoned");
            Arc::clone(memo.entry(s.to_bits()).or_default())
        };
        cell.get_or_init(|| self.compute(s).map(Arc::new)).clone()
    }

    fn compute(&self, s: f64) -> Result<SchedulePoint> {
        let key = self.key(s);
        if let Some(store) = &self.store {
            if let Some(point) = store.load(&key) {
                if point.spectral.ground.len() == self.dim() {
                    return Ok(point);
                }
                log::warn!("stored point at s = {s} has the wrong dimension, recomputing");
            }
        }
        let wrap = |e: Error| Error::PointFailed {
            s,
            source: Box::new(e),
        };
        let op = self.hubbard.operator(&self.instance.params(s)).map_err(wrap)?;
        let (spectral, e_max) = self.backend.solve(&op, &self.spectral).map_err(wrap)?;
        self.solves.fetch_add(1, Ordering::Relaxed);
        let window = WindowMap::new((spectral.e0, e_max), self.margin).map_err(wrap)?;
        let point = SchedulePoint {
            s,
            normalized_gap: window.gap(spectral.gap),
            spectral,
            e_max,
            window,
        };
        if let Some(store) = &self.store {
            store.store(&key, &point);
        }
        Ok(point)
    }

    pub fn evaluate_schedule(&self, s_list: &[f64]) -> Result<ScheduleData> {
        if s_list.len() < 2 || s_list[0] != 0.0 || *s_list.last().unwrap() != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "schedule must run from 0 to 1 with at least two points: {s_list:?}"
            )));
        }
        if s_list.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidParameter(format!("schedule not sorted: {s_list:?}")));
        }
        let evaluated: Vec<Result<Arc<SchedulePoint>>> =
            s_list.par_iter().map(|&s| self.evaluate_point(s)).collect();
        let mut points: Vec<SchedulePoint> = Vec::with_capacity(s_list.len());
        let mut fidelities = Vec::with_capacity(s_list.len() - 1);
        for p in evaluated {
            let p = p?;
            match points.last() {
                None => points.push((*p).clone()),
                Some(prev) => {
                    let (f, aligned) = aligned_to(prev, &p);
                    fidelities.push(f);
                    points.push(aligned);
                }
            }
        }
        Ok(ScheduleData {
            instance: self.instance.clone(),
            points,
            fidelities,
        })
    }

    /// Insert the midpoint of the lowest-fidelity step and recompute the two
    /// fidelities it replaces.
    pub fn refine(&self, data: &ScheduleData, min_step: f64) -> Result<Refinement> {
        let (step, s_new) = refine_target(&data.s_values(), &data.fidelities, min_step)?;
        let fresh = self.evaluate_point(s_new)?;
        let (f_left, mid) = aligned_to(&data.points[step - 1], &fresh);
        let f_right = overlap(mid.ground(), data.points[step].ground()).powi(2).clamp(0.0, 1.0);
        let mut out = data.clone();
        out.points.insert(step, mid);
        out.fidelities.splice(step - 1..step, [f_left, f_right]);
        Ok(Refinement {
            data: out,
            step,
            inserted_s: s_new,
        })
    }

    /// Refine from `{0, 1}` while the cost keeps improving; returns the best
    /// schedule seen.
    pub fn optimize(
        &self,
        cost: &dyn Fn(&ScheduleData) -> Result<f64>,
        policy: &OptimizerPolicy,
    ) -> Result<Optimized> {
        policy.validate()?;
        let checked = |d: &ScheduleData| -> Result<f64> {
            let c = cost(d)?;
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Domain(format!("cost function returned {c}")));
            }
            Ok(c)
        };
        let mut data = self.evaluate_schedule(&[0.0, 1.0])?;
        let first = checked(&data)?;
        let mut best = (data.clone(), first);
        let mut trace = vec![TraceEntry {
            iteration: 0,
            inserted_s: None,
            refined_step: None,
            refined_fidelity: None,
            min_fidelity: data.min_fidelity(),
            n_points: data.points.len(),
            cost: first,
            best_cost: first,
        }];
        let mut stale = 0;
        let stop = loop {
            if data.points.len() >= policy.max_points {
                break StopReason::MaxPoints;
            }
            let r = match self.refine(&data, policy.min_step) {
                Ok(r) => r,
                Err(Error::StepFloor { lo, hi, .. }) => {
                    log::info!("step floor between s = {lo} and {hi}");
                    break StopReason::StepFloor;
                }
                Err(e) => return Err(e),
            };
            let min_fidelity = data.min_fidelity();
            let refined_fidelity = data.fidelities[r.step - 1];
            data = r.data;
            let c = checked(&data)?;
            if c < best.1 {
                best = (data.clone(), c);
                stale = 0;
            } else {
                stale += 1;
            }
            trace.push(TraceEntry {
                iteration: trace.len(),
                inserted_s: Some(r.inserted_s),
                refined_step: Some(r.step),
                refined_fidelity: Some(refined_fidelity),
                min_fidelity,
                n_points: data.points.len(),
                cost: c,
                best_cost: best.1,
            });
            if stale >= policy.patience {
                break StopReason::Patience;
            }
        };
        Ok(Optimized {
            best: best.0,
            best_cost: best.1,
            trace,
            stop,
        })
    }
}

fn overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fidelity with `prev` and a copy of `next` whose ground vector has a
/// non-negative overlap with `prev`.
fn aligned_to(prev: &SchedulePoint, next: &SchedulePoint) -> (f64, SchedulePoint) {
    let ov = overlap(prev.ground(), next.ground());
    let mut out = next.clone();
    if ov < 0.0 {
        out.spectral.ground = Arc::new(next.ground().iter().map(|x| -x).collect());
    }
    (ov.powi(2).clamp(0.0, 1.0), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_lattice;
    use crate::spectral::{dense_eigen, fidelity};

    fn instance(m: usize) -> Instance {
        Instance::new(build_lattice(m, 1).unwrap(), None, 0.10).unwrap()
    }

    fn evaluator(m: usize) -> Evaluator {
        Evaluator::new(instance(m), SpectralConfig::default()).unwrap()
    }

    #[test]
    fn free_fermion_point_matches_dense() {
        let ev = evaluator(2);
        let p = ev.evaluate_point(0.0).unwrap();
        let op = ev.hubbard().operator(&HubbardParams::new(4.0, 0.0)).unwrap();
        let dense = dense_eigen(&op).unwrap();
        assert!((p.spectral.gap - (dense.values[1] - dense.values[0])).abs() < 1e-12);
        assert!((p.spectral.gap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn final_point_gap() {
        let p = evaluator(2).evaluate_point(1.0).unwrap();
        assert!((p.spectral.gap - (8f64.sqrt() - 2.0)).abs() < 1e-9);
        let expect = p.window.scale * p.spectral.gap;
        assert_eq!(p.normalized_gap, expect);
    }

    #[test]
    fn cache_returns_same_object() {
        let ev = evaluator(3);
        let a = ev.evaluate_point(0.5).unwrap();
        let b = ev.evaluate_point(0.5).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(ev.solves(), 1);
        let c = ev.evaluate_point(-0.0).unwrap();
        let d = ev.evaluate_point(0.0).unwrap();
        assert!(Arc::ptr_eq(&c, &d));
        assert_eq!(ev.solves(), 2);
    }

    #[test]
    fn concurrent_requests_solve_once() {
        let ev = evaluator(4);
        let got: Vec<_> = (0..8).into_par_iter().map(|_| ev.evaluate_point(0.3).unwrap()).collect();
        assert!(got.windows(2).all(|w| Arc::ptr_eq(&w[0], &w[1])));
        assert_eq!(ev.solves(), 1);
    }

    #[test]
    fn out_of_range_s() {
        assert!(evaluator(2).evaluate_point(1.5).is_err());
        assert!(evaluator(2).evaluate_point(f64::NAN).is_err());
    }

    #[test]
    fn two_point_schedule_fidelity() {
        let ev = evaluator(4);
        let d = ev.evaluate_schedule(&[0.0, 1.0]).unwrap();
        assert_eq!(d.steps(), 1);
        let a = ev.evaluate_point(0.0).unwrap();
        let b = ev.evaluate_point(1.0).unwrap();
        let f = fidelity(a.ground(), b.ground()).unwrap();
        assert!((d.fidelities[0] - f).abs() < 1e-14);
        assert!(overlap(d.points[0].ground(), d.points[1].ground()) >= 0.0);
    }

    #[test]
    fn schedule_structure() {
        let ev = evaluator(4);
        let d = ev.evaluate_schedule(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(d.points.len(), 3);
        assert_eq!(d.fidelities.len(), 2);
        assert!(d.fidelities.iter().all(|f| (0.0..=1.0).contains(f)));
        let dup = ev.evaluate_schedule(&[0.0, 0.5, 0.5, 1.0]).unwrap();
        assert!((dup.fidelities[1] - 1.0).abs() < 1e-12);
        assert!(ev.evaluate_schedule(&[0.0, 0.7, 0.5, 1.0]).is_err());
        assert!(ev.evaluate_schedule(&[0.1, 1.0]).is_err());
        assert!(ev.evaluate_schedule(&[0.0]).is_err());
    }

    #[test]
    fn refine_target_examples() {
        assert_eq!(refine_target(&[0.0, 0.5, 1.0], &[0.7, 0.9], 1e-6).unwrap(), (1, 0.25));
        assert_eq!(refine_target(&[0.0, 0.5, 1.0], &[0.9, 0.9], 1e-6).unwrap(), (1, 0.25));
        assert_eq!(refine_target(&[0.0, 0.5, 1.0], &[0.9, 0.8], 1e-6).unwrap(), (2, 0.75));
        assert!(matches!(
            refine_target(&[0.0, 1e-6, 1.0], &[0.5, 0.9], 1e-6),
            Err(Error::StepFloor { .. })
        ));
    }

    #[test]
    fn refine_touches_only_split_step() {
        let ev = evaluator(4);
        let d = ev.evaluate_schedule(&[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let (k, s_new) = refine_target(&d.s_values(), &d.fidelities, 1e-6).unwrap();
        let r = ev.refine(&d, 1e-6).unwrap();
        assert_eq!((r.step, r.inserted_s), (k, s_new));
        assert_eq!(r.data.points.len(), d.points.len() + 1);
        assert!(r.data.s_values().windows(2).all(|w| w[0] < w[1]));
        for j in 0..d.fidelities.len() {
            let new_j = if j + 1 < k { j } else if j + 1 > k { j + 1 } else { continue };
            assert_eq!(d.fidelities[j], r.data.fidelities[new_j]);
        }
        let fresh = ev.evaluate_schedule(&r.data.s_values()).unwrap();
        for (a, b) in fresh.fidelities.iter().zip(&r.data.fidelities) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_cost_stops_after_patience() {
        let ev = evaluator(3);
        let policy = OptimizerPolicy {
            patience: 4,
            ..OptimizerPolicy::default()
        };
        let out = ev.optimize(&|_| Ok(1.0), &policy).unwrap();
        assert_eq!(out.stop, StopReason::Patience);
        assert_eq!(out.trace.len(), 1 + policy.patience);
        assert_eq!(out.best.points.len(), 2);
        for (i, t) in out.trace.iter().enumerate() {
            assert_eq!(t.iteration, i);
            assert_eq!(t.inserted_s.is_some(), i > 0);
        }
    }

    #[test]
    fn max_points_stop() {
        let ev = evaluator(3);
        let policy = OptimizerPolicy {
            max_points: 4,
            ..OptimizerPolicy::default()
        };
        // strictly improving cost never exhausts patience
        let out = ev.optimize(&|d| Ok(1.0 / d.points.len() as f64), &policy).unwrap();
        assert_eq!(out.stop, StopReason::MaxPoints);
        assert_eq!(out.best.points.len(), 4);
    }

    #[test]
    fn optimizer_is_deterministic() {
        let cost = |d: &ScheduleData| Ok(d.gaps().iter().skip(1).map(|g| 1.0 / g).sum::<f64>() / d.success_probability());
        let a = evaluator(4).optimize(&cost, &OptimizerPolicy::default()).unwrap();
        let b = evaluator(4).optimize(&cost, &OptimizerPolicy::default()).unwrap();
        assert_eq!(a.trace, b.trace);
        assert!(a.trace.windows(2).all(|w| w[1].best_cost <= w[0].best_cost));
        assert!(a.best_cost <= a.trace[0].cost);
    }

    #[test]
    fn uniform_doubling_keeps_min_fidelity() {
        let ev = evaluator(4);
        let mut prev = None;
        for l in [1usize, 2, 4, 8, 16] {
            let s: Vec<f64> = (0..=l).map(|j| j as f64 / l as f64).collect();
            let f = ev.evaluate_schedule(&s).unwrap().min_fidelity();
            if let Some(p) = prev {
                assert!(f >= p - 1e-6, "L = {l}: {f} < {p}");
            }
            prev = Some(f);
        }
    }

    #[test]
    fn lanczos_backend_path() {
        let cfg = SpectralConfig {
            dense_threshold: 1,
            ..SpectralConfig::default()
        };
        let ev = Evaluator::new(instance(4), cfg).unwrap();
        let p = ev.evaluate_point(1.0).unwrap();
        let q = evaluator(4).evaluate_point(1.0).unwrap();
        assert!((p.spectral.gap - q.spectral.gap).abs() < 1e-8);
        assert!((p.e_max - q.e_max).abs() < 1e-8);
    }
}
