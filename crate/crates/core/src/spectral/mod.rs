//! Ground and first-excited eigenpairs, gaps, overlaps and spectral windows.
//!
//! Sector matrices are real symmetric. Small ones go through a dense
//! eigendecomposition; larger ones through restarted Lanczos, with the first
//! excited state obtained from the penalty-deflated operator
//! `H + penalty |psi0><psi0|`.

mod dense;
mod lanczos;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use dense::{dense_eigen, dense_spectrum, DenseEigen, DENSE_CAPACITY};
pub use lanczos::{lanczos_extremal, start_vector, Eigenpair};

use crate::error::{Error, Result};
use crate::model::{LinearOperator, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Lowest,
    Highest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reorthogonalization {
    Full,
    None,
}

/// How the ground-state penalty of the deflated operator is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum PenaltyRule {
    /// `|e0|` when `|e0| > 1`, otherwise 10.
    GroundEnergy,
    Fixed(f64),
}

impl PenaltyRule {
    pub fn penalty(&self, e0: f64) -> f64 {
        match *self {
            PenaltyRule::GroundEnergy => {
                if e0.abs() > 1.0 {
                    e0.abs()
                } else {
                    10.0
                }
            }
            PenaltyRule::Fixed(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    /// Residual tolerance relative to the operator norm.
    pub tol: f64,
    /// Matrix-vector product budget per extremal solve.
    pub max_iter: usize,
    /// Krylov basis size per restart cycle; 0 picks it from `memory_budget_mb`.
    pub krylov_dim: usize,
    pub memory_budget_mb: usize,
    pub reorth: Reorthogonalization,
    pub penalty: PenaltyRule,
    /// Dimensions up to this use dense diagonalization.
    pub dense_threshold: usize,
    pub degeneracy_tol: f64,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 20_000,
            krylov_dim: 0,
            memory_budget_mb: 768,
            reorth: Reorthogonalization::Full,
            penalty: PenaltyRule::GroundEnergy,
            dense_threshold: 200,
            degeneracy_tol: 1e-8,
            seed: 0x5eed_cafe,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.dense_threshold < 1 || self.max_iter == 0 || !(self.degeneracy_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spectral config needs tol > 0, dense_threshold >= 1, max_iter >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub ground: f64,
    pub excited: f64,
    pub penalty: f64,
    pub matvecs: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralPoint {
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub ground: Arc<Vec<f64>>,
    pub excited: Option<Arc<Vec<f64>>>,
    pub residuals: Residuals,
    pub method: SolveMethod,
}

/// Flip the sign so the largest-magnitude entry (lowest index on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn extremal_eigenpair(op: &SparseOperator, end: End, cfg: &SpectralConfig) -> Result<(f64, Vec<f64>)> {
    cfg.validate()?;
    let pair = lanczos_extremal(op, end, cfg, None)?;
    Ok((pair.value, pair.vector))
}

struct Penalized<'a> {
    base: &'a dyn LinearOperator,
    vector: &'a [f64],
    shift: f64,
}

impl LinearOperator for Penalized<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.base.apply(x, y);
        let c = self.shift * lanczos::dot(self.vector, x);
        for (yi, vi) in y.iter_mut().zip(self.vector) {
            *yi += c * vi;
        }
    }
}

fn check_gap(e0: f64, e1: f64, cfg: &SpectralConfig) -> Result<f64> {
    let gap = e1 - e0;
    if gap < cfg.degeneracy_tol {
        return Err(Error::DegenerateGroundState {
            gap,
            tol: cfg.degeneracy_tol,
        });
    }
    Ok(gap)
}

fn dense_point(op: &SparseOperator, cfg: &SpectralConfig) -> Result<(SpectralPoint, f64)> {
    let eig = dense_eigen(op)?;
    let (e0, e1) = (eig.values[0], eig.values[1]);
    let gap = check_gap(e0, e1, cfg)?;
    let mut ground = eig.vector(0);
    canonical_sign(&mut ground);
    let mut excited = eig.vector(1);
    canonical_sign(&mut excited);
    Ok((
        SpectralPoint {
            e0,
            e1,
            gap,
            ground: Arc::new(ground),
            excited: Some(Arc::new(excited)),
            residuals: Residuals {
                ground: 0.0,
                excited: 0.0,
                penalty: 0.0,
                matvecs: 0,
            },
            method: SolveMethod::Dense,
        },
        *eig.values.last().unwrap(),
    ))
}

fn lanczos_point(op: &SparseOperator, cfg: &SpectralConfig) -> Result<SpectralPoint> {
    let ground = lanczos_extremal(op, End::Lowest, cfg, None)?;
    let e0 = ground.value;
    let excited_cfg = SpectralConfig {
        seed: cfg.seed.wrapping_add(1),
        ..cfg.clone()
    };
    let mut penalty = cfg.penalty.penalty(e0);
    let mut matvecs = ground.matvecs;
    let mut excited = None;
    for _attempt in 0..2 {
        let deflated = Penalized {
            base: op,
            vector: &ground.vector,
            shift: penalty,
        };
        let pair = lanczos_extremal(&deflated, End::Lowest, &excited_cfg, None)?;
        matvecs += pair.matvecs;
        let overlap = lanczos::dot(&pair.vector, &ground.vector).powi(2);
        if overlap <= 0.5 {
            excited = Some(pair);
            break;
        }
        // the penalty did not lift psi0 above e1
        log::debug!("penalty {penalty} below gap (overlap {overlap:.3}), retrying");
        penalty = 2.0 * (op.norm_bound() - e0) + 1.0;
    }
    let excited = excited.ok_or_else(|| {
        Error::InvalidParameter("penalty deflation kept returning the ground state".into())
    })?;
    let e1 = excited.value;
    let gap = check_gap(e0, e1, cfg)?;
    let mut g = ground.vector;
    canonical_sign(&mut g);
    let mut x = excited.vector;
    canonical_sign(&mut x);
    Ok(SpectralPoint {
        e0,
        e1,
        gap,
        ground: Arc::new(g),
        excited: Some(Arc::new(x)),
        residuals: Residuals {
            ground: ground.residual,
            excited: excited.residual,
            penalty,
            matvecs,
        },
        method: SolveMethod::Lanczos,
    })
}

pub fn ground_and_first_excited(op: &SparseOperator, cfg: &SpectralConfig) -> Result<SpectralPoint> {
    cfg.validate()?;
    let dim = op.dim();
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "need dimension >= 2 for a gap, got {dim}"
        )));
    }
    if dim <= cfg.dense_threshold {
        return dense_point(op, cfg).map(|(p, _)| p);
    }
    lanczos_point(op, cfg)
}

/// Ground/excited pair plus the top of the spectrum, sharing one dense
/// decomposition when the dimension allows.
pub fn solve_with_bounds(op: &SparseOperator, cfg: &SpectralConfig) -> Result<(SpectralPoint, f64)> {
    cfg.validate()?;
    let dim = op.dim();
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "need dimension >= 2 for a gap, got {dim}"
        )));
    }
    if dim <= cfg.dense_threshold {
        return dense_point(op, cfg);
    }
    let point = lanczos_point(op, cfg)?;
    let top = lanczos_extremal(op, End::Highest, cfg, None)?;
    Ok((point, top.value))
}

pub fn spectrum_bounds(op: &SparseOperator, cfg: &SpectralConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if op.dim() <= cfg.dense_threshold {
        let ev = dense_spectrum(op)?;
        return Ok((ev[0], *ev.last().unwrap()));
    }
    let lo = lanczos_extremal(op, End::Lowest, cfg, None)?;
    let hi = lanczos_extremal(op, End::Highest, cfg, None)?;
    Ok((lo.value, hi.value))
}

/// Amplitude types overlaps can be taken over.
pub trait Amplitude: Copy {
    fn inner(a: &[Self], b: &[Self]) -> Complex64;
}

impl Amplitude for f64 {
    fn inner(a: &[f64], b: &[f64]) -> Complex64 {
        Complex64::new(lanczos::dot(a, b), 0.0)
    }
}

impl Amplitude for Complex64 {
    fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }
}

/// `|<a|b>|^2` for unit vectors, clamped to `[0, 1]`.
pub fn fidelity<T: Amplitude>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(T::inner(a, b).norm_sqr().clamp(0.0, 1.0))
}

/// Affine map `x -> scale * x + offset` sending `[e_min, e_max]` to
/// `[margin, 2 pi - margin]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMap {
    pub scale: f64,
    pub offset: f64,
    pub margin: f64,
}

impl WindowMap {
    pub fn new(bounds: (f64, f64), margin: f64) -> Result<Self> {
        let (e_min, e_max) = bounds;
        if !(0.0..PI).contains(&margin) {
            return Err(Error::InvalidParameter(format!("window margin {margin} outside [0, pi)")));
        }
        if !(e_max > e_min) {
            return Err(Error::Domain(format!(
                "spectrum [{e_min}, {e_max}] has no width to normalize"
            )));
        }
        let scale = (2.0 * PI - 2.0 * margin) / (e_max - e_min);
        Ok(Self {
            scale,
            offset: margin - scale * e_min,
            margin,
        })
    }

    pub fn energy(&self, e: f64) -> f64 {
        self.scale * e + self.offset
    }

    pub fn gap(&self, g: f64) -> f64 {
        self.scale * g
    }
}

pub fn normalize_to_window(
    op: &SparseOperator,
    bounds: (f64, f64),
    margin: f64,
) -> Result<(SparseOperator, WindowMap)> {
    let map = WindowMap::new(bounds, margin)?;
    Ok((op.affine(map.scale, map.offset), map))
}

/// Pluggable eigen-solver backend for schedule evaluation.
pub trait EigenBackend: Send + Sync {
    fn name(&self) -> &'static str;
    /// Ground/excited pair and the largest eigenvalue.
    fn solve(&self, op: &SparseOperator, cfg: &SpectralConfig) -> Result<(SpectralPoint, f64)>;
}

/// Dense below `dense_threshold`, restarted Lanczos above.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactDiagonalization;

impl EigenBackend for ExactDiagonalization {
    fn name(&self) -> &'static str {
        "exact-diagonalization"
    }

    fn solve(&self, op: &SparseOperator, cfg: &SpectralConfig) -> Result<(SpectralPoint, f64)> {
        solve_with_bounds(op, cfg)
    }
}
