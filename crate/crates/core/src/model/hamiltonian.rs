use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::{double_occupancy, down_mode, hop, up_mode};
use super::lattice::LatticeSpec;
use super::sector::{deinterleave, interleave, sector_dimension, SectorBasis, MAX_SITES, SectorSpec};
use crate::error::{Error, Result};

/// Default ceiling on the sector dimension a Hamiltonian may be built for.
pub const DEFAULT_MAX_DIM: usize = 2_000_000;

const PAR_MIN_ROWS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    pub t_hop: f64,
    pub u: f64,
    /// Interpolation parameter: the Coulomb term enters as `s * u`.
    pub s: f64,
}

impl HubbardParams {
    pub fn new(u: f64, s: f64) -> Self {
        Self { t_hop: 1.0, u, s }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_hop.is_finite() || !self.u.is_finite() || self.u < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need finite t_hop and u >= 0, got t_hop = {}, u = {}",
                self.t_hop, self.u
            )));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::InvalidParameter(format!("s = {} outside [0, 1]", self.s)));
        }
        Ok(())
    }
}

/// Anything that can apply a real symmetric matrix to a vector.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Compressed sparse rows with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicate entries are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c as u32);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    fn from_sorted_rows(n: usize, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| v * x[c as usize])
            .sum()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub lattice: LatticeSpec,
    pub params: HubbardParams,
    pub sector: SectorSpec,
}

/// Real symmetric operator `diag + offdiag_scale * offdiag`.
///
/// The off-diagonal pattern is shared so that every point on the
/// interpolation path reuses one hopping matrix.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    diag: Vec<f64>,
    offdiag: Arc<CsrMatrix>,
    offdiag_scale: f64,
    meta: Option<Arc<OperatorMeta>>,
}

impl SparseOperator {
    pub fn new(diag: Vec<f64>, offdiag: Arc<CsrMatrix>, offdiag_scale: f64) -> Self {
        assert_eq!(diag.len(), offdiag.dim());
        Self {
            diag,
            offdiag,
            offdiag_scale,
            meta: None,
        }
    }

    /// Diagonal triplets are folded into the diagonal vector.
    pub fn from_triplets(dim: usize, triplets: Vec<(usize, usize, f64)>) -> Self {
        let mut diag = vec![0.0; dim];
        let mut off = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if r == c {
                diag[r] += v;
            } else {
                off.push((r, c, v));
            }
        }
        Self::new(diag, Arc::new(CsrMatrix::from_triplets(dim, off)), 1.0)
    }

    pub fn from_diagonal(diag: Vec<f64>) -> Self {
        let n = diag.len();
        Self::new(diag, Arc::new(CsrMatrix::from_triplets(n, Vec::new())), 1.0)
    }

    pub fn with_meta(mut self, meta: OperatorMeta) -> Self {
        self.meta = Some(Arc::new(meta));
        self
    }

    pub fn meta(&self) -> Option<&OperatorMeta> {
        self.meta.as_deref()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `scale * self + shift * I`
    pub fn affine(&self, scale: f64, shift: f64) -> SparseOperator {
        SparseOperator {
            diag: self.diag.iter().map(|d| scale * d + shift).collect(),
            offdiag: Arc::clone(&self.offdiag),
            offdiag_scale: scale * self.offdiag_scale,
            meta: self.meta.clone(),
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        let off = self.offdiag_scale * self.offdiag.get(r, c);
        if r == c {
            self.diag[r] + off
        } else {
            off
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] += self.diag[r];
            for (c, v) in self.offdiag.row(r) {
                m[(r, c)] += self.offdiag_scale * v;
            }
        }
        m
    }

    /// `max |H_rc - H_cr|` over stored entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim() {
            for (c, v) in self.offdiag.row(r) {
                worst = worst.max((self.offdiag_scale * (v - self.offdiag.get(c, r))).abs());
            }
        }
        worst
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|r| {
                self.diag[r].abs()
                    + self.offdiag_scale.abs() * self.offdiag.row(r).map(|(_, v)| v.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|r| self.entry(r, r)).sum()
    }

    pub fn nnz(&self) -> usize {
        self.offdiag.nnz() + self.dim()
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let row = |(r, yr): (usize, &mut f64)| {
            *yr = self.diag[r] * x[r] + self.offdiag_scale * self.offdiag.row_dot(r, x);
        };
        if y.len() >= PAR_MIN_ROWS {
            y.par_iter_mut()
                .with_min_len(PAR_MIN_ROWS)
                .enumerate()
                .for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Hubbard model restricted to one particle-number sector, with the
/// `s`-independent pieces (basis, hopping pattern, double occupancies) built once.
#[derive(Debug, Clone)]
pub struct HubbardSector {
    lattice: LatticeSpec,
    basis: Arc<SectorBasis>,
    hopping: Arc<CsrMatrix>,
    double_occ: Arc<Vec<f64>>,
}

impl HubbardSector {
    pub fn new(lattice: &LatticeSpec, sector: SectorSpec) -> Result<Self> {
        Self::with_capacity(lattice, sector, DEFAULT_MAX_DIM)
    }

    pub fn with_capacity(lattice: &LatticeSpec, sector: SectorSpec, max_dim: usize) -> Result<Self> {
        if sector.n_sites != lattice.n_sites {
            return Err(Error::InvalidSector(format!(
                "sector has {} sites, lattice {}",
                sector.n_sites, lattice.n_sites
            )));
        }
        if sector.n_sites > MAX_SITES {
            return Err(Error::Capacity {
                what: "lattice sites",
                requested: sector.n_sites as u128,
                limit: MAX_SITES as u128,
            });
        }
        let dim = sector_dimension(&sector)?;
        if dim > max_dim as u128 {
            return Err(Error::Capacity {
                what: "sector dimension",
                requested: dim,
                limit: max_dim as u128,
            });
        }
        let basis = SectorBasis::new(sector);
        let n = lattice.n_sites;
        let mode_pairs: Vec<(usize, usize)> = lattice
            .edges
            .iter()
            .flat_map(|&(i, j)| {
                [
                    (up_mode(i), up_mode(j)),
                    (up_mode(j), up_mode(i)),
                    (down_mode(i), down_mode(j)),
                    (down_mode(j), down_mode(i)),
                ]
            })
            .collect();

        let row_entries = |r: usize| -> Vec<(u32, f64)> {
            let (up, down) = basis.state(r);
            let word = interleave(up, down, n);
            let mut row: Vec<(u32, f64)> = mode_pairs
                .iter()
                .filter_map(|&(p, q)| hop(word, p, q))
                .map(|(out, sign)| {
                    let (u2, d2) = deinterleave(out, n);
                    (basis.index(u2, d2) as u32, sign)
                })
                .collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            row
        };
        let dim = basis.len();
        let rows: Vec<Vec<(u32, f64)>> = if dim >= PAR_MIN_ROWS {
            (0..dim).into_par_iter().map(row_entries).collect()
        } else {
            (0..dim).map(row_entries).collect()
        };
        let double_occ = (0..dim)
            .map(|r| {
                let (up, down) = basis.state(r);
                double_occupancy(interleave(up, down, n), n) as f64
            })
            .collect();
        Ok(Self {
            lattice: lattice.clone(),
            basis: Arc::new(basis),
            hopping: Arc::new(CsrMatrix::from_sorted_rows(dim, rows)),
            double_occ: Arc::new(double_occ),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn sector(&self) -> SectorSpec {
        self.basis.sector
    }

    /// `H(s) = T_hub * hopping + s * U * sum_i n_up n_down`
    pub fn operator(&self, params: &HubbardParams) -> Result<SparseOperator> {
        params.validate()?;
        let coulomb = params.s * params.u;
        let diag = self.double_occ.iter().map(|d| coulomb * d).collect();
        Ok(
            SparseOperator::new(diag, Arc::clone(&self.hopping), params.t_hop).with_meta(OperatorMeta {
                lattice: self.lattice.clone(),
                params: *params,
                sector: self.sector(),
            }),
        )
    }
}

pub fn build_hamiltonian(
    lat: &LatticeSpec,
    params: &HubbardParams,
    sec: &SectorSpec,
) -> Result<SparseOperator> {
    HubbardSector::new(lat, *sec)?.operator(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fock::{embed_in_fock, fock_hamiltonian_dense};
    use crate::model::lattice::build_lattice;

    fn two_site() -> SparseOperator {
        let lat = build_lattice(2, 1).unwrap();
        let sec = SectorSpec::new(2, 1, 1).unwrap();
        build_hamiltonian(&lat, &HubbardParams::new(4.0, 1.0), &sec).unwrap()
    }

    #[test]
    fn two_site_spectrum_is_analytic() {
        let h = two_site().to_dense();
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let r8 = 8f64.sqrt();
        let expect = [2.0 - r8, 0.0, 4.0, 2.0 + r8];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn s_zero_is_pure_hopping() {
        let lat = build_lattice(3, 2).unwrap();
        let sec = SectorSpec::new(6, 3, 2).unwrap();
        let h = build_hamiltonian(&lat, &HubbardParams::new(6.0, 0.0), &sec).unwrap();
        assert!(h.diagonal().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn hermitian_and_linear_in_s() {
        let lat = build_lattice(3, 2).unwrap();
        let sec = SectorSpec::new(6, 3, 3).unwrap();
        let hs = HubbardSector::new(&lat, sec).unwrap();
        let h0 = hs.operator(&HubbardParams::new(6.0, 0.0)).unwrap().to_dense();
        let h1 = hs.operator(&HubbardParams::new(6.0, 1.0)).unwrap().to_dense();
        for s in [0.25, 0.6] {
            let op = hs.operator(&HubbardParams::new(6.0, s)).unwrap();
            assert!(op.hermiticity_residual() < 1e-12);
            let hs_dense = op.to_dense();
            let lin = &h0 + (&h1 - &h0) * s;
            assert!((hs_dense - lin).amax() < 1e-12);
        }
    }

    #[test]
    fn sector_matrix_is_restriction_of_fock_matrix() {
        let lat = build_lattice(2, 2).unwrap();
        let params = HubbardParams::new(8.0, 0.7);
        let full = fock_hamiltonian_dense(&lat, &params).unwrap();
        let sec = SectorSpec::new(4, 2, 1).unwrap();
        let hs = HubbardSector::new(&lat, sec).unwrap();
        let h = hs.operator(&params).unwrap().to_dense();
        let d = hs.dim();
        let words: Vec<usize> = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                let f = embed_in_fock(hs.basis(), &e).unwrap();
                f.iter().position(|&x| x == 1.0).unwrap()
            })
            .collect();
        for r in 0..d {
            for c in 0..d {
                assert_eq!(h[(r, c)], full[(words[r], words[c])]);
            }
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let lat = build_lattice(4, 1).unwrap();
        let sec = SectorSpec::new(4, 2, 2).unwrap();
        assert!(matches!(
            HubbardSector::with_capacity(&lat, sec, 10),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn triplets_sum_duplicates() {
        let op = SparseOperator::from_triplets(2, vec![(0, 1, 1.0), (0, 1, 0.5), (1, 0, 1.5), (0, 0, 2.0)]);
        assert_eq!(op.entry(0, 1), 1.5);
        assert_eq!(op.entry(0, 0), 2.0);
        assert_eq!(op.hermiticity_residual(), 0.0);
    }
}
