//! Qubitized walk operators: the gap map `acos(1 - D/N)`, walk eigenstates
//! and exact small-system walk fidelities.
//!
//! For `Hbar/lambda = sum_l beta_l^2 P_l` (signs folded into `P_l`) the walk
//! is `W = (2|G><G| - 1) V` with `|G> = sum_l beta_l |l>` and
//! `V = sum_l |l><l| (x) P_l`. Enlarged-space index is `l * 2^n + b`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tts::rewind_steps;
use super::{CostModel, CostReport, RewindEvaluator, Units};
use crate::error::{Error, Result};
use crate::model::{fock::embed_in_fock, pauli_decompose, HubbardParams, LatticeSpec, PauliString, PauliSum};
use crate::schedule::ScheduleData;
use crate::spectral::WindowMap;

/// Largest lattice the exact walk construction accepts.
pub const MAX_EXACT_SITES: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Walk gap `acos(1 - delta / norm)`.
pub fn qubitized_gap(delta: f64, norm: f64) -> Result<f64> {
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(format!("normalization {norm} must be positive")));
    }
    if !(delta >= 0.0 && delta <= 2.0 * norm) {
        return Err(Error::Domain(format!("gap {delta} outside [0, 2 * {norm}]")));
    }
    Ok((1.0 - delta / norm).clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitizationMode {
    Gapmap,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitizationSettings {
    pub mode: QubitizationMode,
    /// The `N` in `acos(1 - D/N)` and `Hbar = I - H/N`.
    pub normalization: f64,
    /// Window margin the schedule was normalized with.
    pub margin: f64,
}

impl Default for QubitizationSettings {
    fn default() -> Self {
        Self {
            mode: QubitizationMode::Gapmap,
            normalization: 2.0 * PI,
            margin: 0.1,
        }
    }
}

impl QubitizationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.normalization > 0.0 && self.normalization.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "qubitization normalization {} must be positive",
                self.normalization
            )));
        }
        WindowMap::new((0.0, 1.0), self.margin).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Linear combination of signed Pauli strings with ancilla amplitudes `beta`.
#[derive(Debug, Clone)]
pub struct WalkLcu {
    pub n_qubits: usize,
    pub paulis: Vec<PauliString>,
    pub signs: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda: f64,
}

impl WalkLcu {
    pub fn from_pauli_sum(ps: &PauliSum) -> Result<Self> {
        Self::from_terms(ps.n_qubits, &ps.terms)
    }

    /// Zero coefficients are kept as ancilla states with `beta = 0`, so
    /// several operators can share one ancilla register.
    pub fn from_terms(n_qubits: usize, terms: &[(PauliString, f64)]) -> Result<Self> {
        if n_qubits > 2 * MAX_EXACT_SITES {
            return Err(Error::Capacity {
                what: "walk operator qubits",
                requested: n_qubits as u128,
                limit: 2 * MAX_EXACT_SITES as u128,
            });
        }
        let lambda: f64 = terms.iter().map(|(_, c)| c.abs()).sum();
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter("walk operator of a zero Hamiltonian".into()));
        }
        Ok(Self {
            n_qubits,
            paulis: terms.iter().map(|(p, _)| *p).collect(),
            signs: terms.iter().map(|(_, c)| if *c < 0.0 { -1.0 } else { 1.0 }).collect(),
            beta: terms.iter().map(|(_, c)| (c.abs() / lambda).sqrt()).collect(),
            lambda,
        })
    }

    pub fn n_terms(&self) -> usize {
        self.paulis.len()
    }

    pub fn system_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.n_terms() * self.system_dim()
    }

    fn check(&self, len: usize, want: usize) -> Result<()> {
        if len != want {
            return Err(Error::DimensionMismatch { left: len, right: want });
        }
        Ok(())
    }

    /// `|G>|psi>`
    pub fn prepare(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(psi.len(), self.system_dim())?;
        let mut out = Vec::with_capacity(self.dim());
        for &b in &self.beta {
            out.extend(psi.iter().map(|x| x * b));
        }
        Ok(out)
    }

    /// `V x`, applying the signed `P_l` to ancilla block `l`.
    pub fn select(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(x.len(), self.dim())?;
        let d = self.system_dim();
        let mut y = vec![ZERO; x.len()];
        for (l, (p, sign)) in self.paulis.iter().zip(&self.signs).enumerate() {
            let (xin, yout) = (&x[l * d..(l + 1) * d], &mut y[l * d..(l + 1) * d]);
            for (b, amp) in xin.iter().enumerate() {
                let (out, phase) = p.act(b as u64);
                yout[out as usize] += phase * amp * *sign;
            }
        }
        Ok(y)
    }

    /// `(2|G><G| - 1) (x) I`
    pub fn reflect(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(x.len(), self.dim())?;
        let d = self.system_dim();
        let mut g = vec![ZERO; d];
        for (l, b) in self.beta.iter().enumerate() {
            for (gi, xi) in g.iter_mut().zip(&x[l * d..(l + 1) * d]) {
                *gi += xi * *b;
            }
        }
        let mut y: Vec<Complex64> = x.iter().map(|v| -v).collect();
        for (l, b) in self.beta.iter().enumerate() {
            for (yi, gi) in y[l * d..(l + 1) * d].iter_mut().zip(&g) {
                *yi += gi * (2.0 * b);
            }
        }
        Ok(y)
    }

    /// `W x = (2|G><G| - 1) V x`
    pub fn walk(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.reflect(&self.select(x)?)
    }

    /// Explicit `W = -S V` with `S = B (1 - 2|0><0|) B^dagger (x) I`, `B` the
    /// Householder reflection taking `|0>` to `|G>`.
    pub fn dense_walk(&self) -> Result<DMatrix<Complex64>> {
        let (k, d) = (self.n_terms(), self.system_dim());
        if k * d > 4096 {
            return Err(Error::Capacity {
                what: "dense walk operator dimension",
                requested: (k * d) as u128,
                limit: 4096,
            });
        }
        let mut u = DMatrix::<f64>::zeros(k, 1);
        u[(0, 0)] = 1.0;
        for (l, b) in self.beta.iter().enumerate() {
            u[(l, 0)] -= b;
        }
        let un = u.norm_squared();
        let b_mat = if un < 1e-28 {
            DMatrix::<f64>::identity(k, k)
        } else {
            DMatrix::<f64>::identity(k, k) - (&u * u.transpose()) * (2.0 / un)
        };
        let mut r0 = DMatrix::<f64>::identity(k, k);
        r0[(0, 0)] = -1.0;
        let s_anc = &b_mat * r0 * b_mat.transpose();
        let s = s_anc.map(|x| Complex64::new(x, 0.0)).kronecker(&DMatrix::<Complex64>::identity(d, d));
        let mut v = DMatrix::from_element(k * d, k * d, ZERO);
        for (l, (p, sign)) in self.paulis.iter().zip(&self.signs).enumerate() {
            for b in 0..d {
                let (out, phase) = p.act(b as u64);
                v[(l * d + out as usize, l * d + b)] = phase * *sign;
            }
        }
        Ok(-(s * v))
    }
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Walk eigenvector with eigenvalue `exp(+-i acos(e_bar))` for `psi` an
/// eigenvector of `Hbar/lambda` with eigenvalue `e_bar`:
/// `(|G>|psi> - exp(-+i theta) V|G>|psi>) / (sqrt(2) sin theta)`.
pub fn walk_eigenstate(lcu: &WalkLcu, psi: &[Complex64], e_bar: f64, branch: Branch) -> Result<Vec<Complex64>> {
    if !(e_bar.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "walk eigenvalue argument {e_bar} needs |e| < 1 (sin theta = 0)"
        )));
    }
    let theta = e_bar.acos();
    let mu = match branch {
        Branch::Plus => Complex64::from_polar(1.0, theta),
        Branch::Minus => Complex64::from_polar(1.0, -theta),
    };
    let a = lcu.prepare(psi)?;
    let b = lcu.select(&a)?;
    let norm = 2f64.sqrt() * theta.sin();
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y / mu) / norm).collect())
}

/// `Hbar = I - Hhat / N` with `Hhat` the window-normalized `H(s)` on the full
/// Fock register.
pub fn normalized_walk_hamiltonian(
    lattice: &LatticeSpec,
    params: &HubbardParams,
    window: &WindowMap,
    normalization: f64,
) -> Result<PauliSum> {
    let h = pauli_decompose(lattice, params)?;
    Ok(h.affine(-window.scale / normalization, 1.0 - window.offset / normalization))
}

/// Step data with the walk gap and, in exact mode, walk-space fidelities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitizedSchedule {
    pub mode: QubitizationMode,
    pub normalization: f64,
    pub s: Vec<f64>,
    pub normalized_gaps: Vec<f64>,
    pub walk_gaps: Vec<f64>,
    pub fidelities: Vec<f64>,
    /// One-norms `lambda_j` of `Hbar_j` (exact mode).
    pub one_norms: Option<Vec<f64>>,
    /// Points where the map shrinks the gap (`walk_gap <= normalized_gap`).
    pub disadvantaged: Vec<usize>,
}

pub fn qubitize_schedule(data: &ScheduleData, settings: &QubitizationSettings) -> Result<QubitizedSchedule> {
    settings.validate()?;
    if let Some(p) = data.points.iter().find(|p| (p.window.margin - settings.margin).abs() > 1e-15) {
        return Err(Error::InvalidParameter(format!(
            "schedule normalized with margin {}, settings say {}",
            p.window.margin, settings.margin
        )));
    }
    let normalized_gaps = data.normalized_gaps();
    let (walk_gaps, fidelities, one_norms) = match settings.mode {
        QubitizationMode::Gapmap => {
            let w = normalized_gaps
                .iter()
                .map(|&g| qubitized_gap(g, settings.normalization))
                .collect::<Result<Vec<_>>>()?;
            (w, data.fidelities.clone(), None)
        }
        QubitizationMode::Exact => {
            let ex = exact_walk_data(data, settings.normalization)?;
            (ex.walk_gaps, ex.fidelities, Some(ex.one_norms))
        }
    };
    let disadvantaged = walk_gaps
        .iter()
        .zip(&normalized_gaps)
        .enumerate()
        .filter(|(_, (w, g))| w <= g)
        .map(|(i, _)| i)
        .collect();
    Ok(QubitizedSchedule {
        mode: settings.mode,
        normalization: settings.normalization,
        s: data.s_values(),
        normalized_gaps,
        walk_gaps,
        fidelities,
        one_norms,
        disadvantaged,
    })
}

/// Rewind chain over walk gaps; TTS counts walk-operator applications.
pub fn tts_qubitized(q: &QubitizedSchedule) -> Result<CostReport> {
    let per_step = rewind_steps(&q.fidelities, &q.walk_gaps, RewindEvaluator::Chain)?;
    Ok(CostReport {
        model: match q.mode {
            QubitizationMode::Gapmap => CostModel::QubitizedGapmap,
            QubitizationMode::Exact => CostModel::QubitizedExact,
        },
        units: Units::WalkApplications,
        tts: per_step.iter().sum(),
        repetitions: None,
        success_prob: q.fidelities.iter().product(),
        per_step,
        epsilon: 0.0,
        step_gaps: q.walk_gaps.clone(),
        fidelities: q.fidelities.clone(),
        normalized_tts: None,
        series_tts: None,
    })
}

/// Per-point walk construction used by the exact mode and the projective simulator.
#[derive(Debug, Clone)]
pub struct WalkPoint {
    pub lcu: WalkLcu,
    /// `|G>|psi0>`
    pub a: Vec<Complex64>,
    /// `V |G>|psi0>`
    pub b: Vec<Complex64>,
    /// Eigenvalues of `Hbar / lambda` for the ground and first excited states.
    pub e_bar: (f64, f64),
}

impl WalkPoint {
    pub fn walk_gap(&self) -> f64 {
        self.e_bar.1.acos() - self.e_bar.0.acos()
    }

    /// Orthonormal basis of the ground walk eigenspace `span{a, b}`.
    pub fn eigenspace(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let ab = cdot(&self.a, &self.b);
        let mut q2: Vec<Complex64> = self.b.iter().zip(&self.a).map(|(b, a)| b - a * ab).collect();
        let n = cnorm(&q2);
        q2.iter_mut().for_each(|x| *x /= n);
        (self.a.clone(), q2)
    }

    /// `|| P x ||^2` for `P` the projector onto the ground walk eigenspace.
    pub fn captured(&self, x: &[Complex64]) -> f64 {
        let (q1, q2) = self.eigenspace();
        (cdot(&q1, x).norm_sqr() + cdot(&q2, x).norm_sqr()).clamp(0.0, 1.0)
    }
}

pub fn walk_points(data: &ScheduleData, normalization: f64) -> Result<Vec<WalkPoint>> {
    let lat = &data.instance.lattice;
    if lat.n_sites > MAX_EXACT_SITES {
        return Err(Error::Capacity {
            what: "exact qubitization sites",
            requested: lat.n_sites as u128,
            limit: MAX_EXACT_SITES as u128,
        });
    }
    let hbars = data
        .points
        .iter()
        .map(|p| normalized_walk_hamiltonian(lat, &data.instance.params(p.s), &p.window, normalization))
        .collect::<Result<Vec<_>>>()?;
    // one ancilla register for the whole schedule
    let mut union: BTreeMap<PauliString, ()> = BTreeMap::new();
    for h in &hbars {
        union.extend(h.terms.iter().map(|(p, _)| (*p, ())));
    }
    let basis = crate::model::SectorBasis::new(data.instance.sector);
    data.points
        .iter()
        .zip(&hbars)
        .map(|(p, h)| {
            let terms: Vec<(PauliString, f64)> = union.keys().map(|q| (*q, h.coefficient(q))).collect();
            let lcu = WalkLcu::from_terms(h.n_qubits, &terms)?;
            let psi: Vec<Complex64> = embed_in_fock(&basis, p.ground())?
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect();
            let e_bar = |e: f64| (1.0 - p.window.energy(e) / normalization) / lcu.lambda;
            let e_bar = (e_bar(p.spectral.e0), e_bar(p.spectral.e1));
            if !(e_bar.0.abs() < 1.0 && e_bar.1.abs() < 1.0) {
                return Err(Error::Domain(format!("walk eigenvalue arguments {e_bar:?} at s = {}", p.s)));
            }
            let a = lcu.prepare(&psi)?;
            let b = lcu.select(&a)?;
            Ok(WalkPoint { lcu, a, b, e_bar })
        })
        .collect()
}

struct ExactWalk {
    walk_gaps: Vec<f64>,
    fidelities: Vec<f64>,
    one_norms: Vec<f64>,
}

fn exact_walk_data(data: &ScheduleData, normalization: f64) -> Result<ExactWalk> {
    let pts = walk_points(data, normalization)?;
    let fidelities = pts.windows(2).map(|w| w[1].captured(&w[0].a)).collect();
    Ok(ExactWalk {
        walk_gaps: pts.iter().map(WalkPoint::walk_gap).collect(),
        fidelities,
        one_norms: pts.iter().map(|p| p.lcu.lambda).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_lattice;
    use crate::schedule::{Evaluator, Instance};
    use crate::spectral::SpectralConfig;
    use proptest::prelude::*;

    #[test]
    fn gap_map_examples() {
        assert_eq!(qubitized_gap(0.0, 2.0 * PI).unwrap(), 0.0);
        assert!((qubitized_gap(0.1, 2.0 * PI).unwrap() - 0.1786).abs() < 1e-3);
        let w = qubitized_gap(2.0, 2.0 * PI).unwrap();
        assert!((w - 0.6817f64.acos()).abs() < 1e-3 && w < 2.0);
        assert!(matches!(qubitized_gap(13.0, 2.0 * PI), Err(Error::Domain(_))));
        assert!(qubitized_gap(0.1, 0.0).is_err());
    }

    #[test]
    fn crossover_near_point_three_two() {
        // bisect acos(1 - x / 2 pi) - x
        let f = |x: f64| qubitized_gap(x, 2.0 * PI).unwrap() - x;
        let (mut lo, mut hi) = (0.1, 1.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!(lo > 0.31 && lo < 0.33, "{lo}");
    }

    proptest! {
        #[test]
        fn gap_map_monotone(a in 0.0f64..12.0, b in 0.0f64..12.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(qubitized_gap(lo, 2.0 * PI).unwrap() < qubitized_gap(hi, 2.0 * PI).unwrap());
        }
    }

    fn two_site_hbar(s: f64) -> (PauliSum, Vec<Complex64>, f64, f64) {
        let lat = build_lattice(2, 1).unwrap();
        let inst = Instance::new(lat.clone(), None, 0.1).unwrap();
        let ev = Evaluator::new(inst.clone(), SpectralConfig::default()).unwrap();
        let p = ev.evaluate_point(s).unwrap();
        let hbar = normalized_walk_hamiltonian(&lat, &inst.params(s), &p.window, 2.0 * PI).unwrap();
        let psi = embed_in_fock(ev.hubbard().basis(), p.ground())
            .unwrap()
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        let e = |x: f64| 1.0 - p.window.energy(x) / (2.0 * PI);
        (hbar, psi, e(p.spectral.e0), e(p.spectral.e1))
    }

    #[test]
    fn walk_eigenstates_against_explicit_walk() {
        for s in [0.25, 0.5, 1.0] {
            let (hbar, psi, e0, _) = two_site_hbar(s);
            let lcu = WalkLcu::from_pauli_sum(&hbar).unwrap();
            let hpsi = hbar.apply(&psi);
            for (x, y) in hpsi.iter().zip(&psi) {
                assert!((x - y * e0).norm() < 1e-10);
            }
            let w = lcu.dense_walk().unwrap();
            let e_bar = e0 / lcu.lambda;
            let theta = e_bar.acos();
            let mut states = Vec::new();
            for (branch, sign) in [(Branch::Plus, 1.0), (Branch::Minus, -1.0)] {
                let phi = walk_eigenstate(&lcu, &psi, e_bar, branch).unwrap();
                assert!((cnorm(&phi) - 1.0).abs() < 1e-10);
                let v = nalgebra::DVector::from_column_slice(&phi);
                let res = &w * &v - &v * Complex64::from_polar(1.0, sign * theta);
                assert!(res.norm() < 1e-8, "s = {s}: residual {}", res.norm());
                let fast = lcu.walk(&phi).unwrap();
                let diff: f64 = fast.iter().zip((&w * &v).iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
                assert!(diff.sqrt() < 1e-10);
                states.push(phi);
            }
            assert!(cdot(&states[0], &states[1]).norm() < 1e-10);
        }
    }

    #[test]
    fn saturated_one_norm_is_rejected() {
        // two free sites: the ground energy of the hopping term equals minus its one-norm
        let (hbar, psi, e0, _) = two_site_hbar(0.0);
        let lcu = WalkLcu::from_pauli_sum(&hbar).unwrap();
        assert!((e0 / lcu.lambda - 1.0).abs() < 1e-12);
        assert!(matches!(
            walk_eigenstate(&lcu, &psi, e0 / lcu.lambda, Branch::Plus),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eigenphase_of_zero_energy() {
        let (hbar, psi, _, _) = two_site_hbar(1.0);
        let lcu = WalkLcu::from_pauli_sum(&hbar).unwrap();
        let phi = walk_eigenstate(&lcu, &psi, 0.0, Branch::Plus).unwrap();
        assert!((cnorm(&phi) - 1.0).abs() < 1e-10);
        assert!(walk_eigenstate(&lcu, &psi, 1.0, Branch::Plus).is_err());
    }

    fn schedule(m: usize, s: &[f64]) -> ScheduleData {
        let inst = Instance::new(build_lattice(m, 1).unwrap(), None, 0.1).unwrap();
        Evaluator::new(inst, SpectralConfig::default()).unwrap().evaluate_schedule(s).unwrap()
    }

    #[test]
    fn gapmap_keeps_fidelities() {
        let d = schedule(4, &[0.0, 0.5, 1.0]);
        let q = qubitize_schedule(&d, &QubitizationSettings::default()).unwrap();
        assert_eq!(q.fidelities, d.fidelities);
        for (w, g) in q.walk_gaps.iter().zip(d.normalized_gaps()) {
            assert_eq!(*w, qubitized_gap(g, 2.0 * PI).unwrap());
        }
        let r = tts_qubitized(&q).unwrap();
        assert_eq!(r.model, CostModel::QubitizedGapmap);
        r.validate().unwrap();
    }

    #[test]
    fn exact_mode_small_chain() {
        let d = schedule(3, &[0.0, 0.5, 1.0]);
        let settings = QubitizationSettings {
            mode: QubitizationMode::Exact,
            ..QubitizationSettings::default()
        };
        let q = qubitize_schedule(&d, &settings).unwrap();
        assert_eq!(q.fidelities.len(), 2);
        assert!(q.fidelities.iter().all(|f| *f > 0.0 && *f <= 1.0));
        assert!(q.walk_gaps.iter().all(|w| *w > 0.0));
        // identical neighbouring points capture everything
        let same = schedule(3, &[0.0, 0.5, 0.5, 1.0]);
        let q = qubitize_schedule(&same, &settings).unwrap();
        assert!((q.fidelities[1] - 1.0).abs() < 1e-12);
        let big = schedule(5, &[0.0, 1.0]);
        assert!(matches!(qubitize_schedule(&big, &settings), Err(Error::Capacity { .. })));
    }

    #[test]
    fn advantage_regime_costs_less() {
        let d = schedule(7, &[0.0, 0.5, 1.0]);
        assert!(d.normalized_gaps().iter().all(|g| *g < 0.32));
        let q = qubitize_schedule(&d, &QubitizationSettings::default()).unwrap();
        assert!(q.disadvantaged.is_empty());
        for (w, g) in q.walk_gaps.iter().zip(d.normalized_gaps()) {
            assert!(1.0 / w < 1.0 / g);
        }
    }
}
