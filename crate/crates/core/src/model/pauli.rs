//! Pauli-string decomposition of the full Fock-space Hubbard Hamiltonian.
//!
//! Qubit `q` carries fermionic mode `q` (site-major, spin interleaved), and
//! basis index bit `q` is the occupation of that mode. Hopping terms map to
//! `(t/2)(X Z..Z X + Y Z..Z Y)` and `n_a n_b` to `(I - Z_a - Z_b + Z_a Z_b)/4`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{down_mode, up_mode};
use super::hamiltonian::HubbardParams;
use super::lattice::LatticeSpec;
use crate::error::{Error, Result};

/// Largest register for which dense reconstructions are allowed.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Coefficients below this magnitude are dropped.
const COEFF_EPS: f64 = 1e-14;

/// Tensor product of single-qubit Paulis in symplectic form: qubit `q` is
/// `X` if only bit `q` of `x` is set, `Z` if only `z`, `Y` if both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x(q: usize) -> Self {
        Self { x: 1 << q, z: 0 }
    }

    pub fn y(q: usize) -> Self {
        Self { x: 1 << q, z: 1 << q }
    }

    pub fn z(q: usize) -> Self {
        Self { x: 0, z: 1 << q }
    }

    /// Parse a label with qubit 0 leftmost, e.g. `"XZXI"`.
    pub fn from_label(label: &str) -> Result<Self> {
        let mut p = Self::IDENTITY;
        for (q, ch) in label.chars().enumerate() {
            match ch {
                'I' => {}
                'X' => p.x |= 1 << q,
                'Y' => {
                    p.x |= 1 << q;
                    p.z |= 1 << q;
                }
                'Z' => p.z |= 1 << q,
                other => {
                    return Err(Error::InvalidParameter(format!("bad Pauli letter {other:?}")))
                }
            }
        }
        Ok(p)
    }

    /// Product on disjoint supports.
    fn disjoint_mul(self, other: Self) -> Self {
        debug_assert_eq!((self.x | self.z) & (other.x | other.z), 0);
        Self {
            x: self.x | other.x,
            z: self.z | other.z,
        }
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// True when the matrix has real entries (even number of `Y`).
    pub fn is_real(&self) -> bool {
        self.y_count().is_multiple_of(2)
    }

    /// `P |b> = phase * |b ^ x>`
    #[inline]
    pub fn act(&self, b: u64) -> (u64, Complex64) {
        let sign = if (b & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let phase = match self.y_count() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (b ^ self.x, phase)
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| match (self.x >> q & 1, self.z >> q & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            })
            .collect()
    }
}

/// Weighted sum of Pauli strings with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<(PauliString, f64)>,
    /// Sum of absolute coefficients.
    pub one_norm: f64,
}

impl PauliSum {
    pub fn from_map(n_qubits: usize, map: BTreeMap<PauliString, f64>) -> Self {
        let terms: Vec<(PauliString, f64)> = map.into_iter().filter(|(_, c)| c.abs() > COEFF_EPS).collect();
        let one_norm = terms.iter().map(|(_, c)| c.abs()).sum();
        Self {
            n_qubits,
            terms,
            one_norm,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0.0, |(_, c)| *c)
    }

    /// `scale * self + shift * I`
    pub fn affine(&self, scale: f64, shift: f64) -> PauliSum {
        let mut map: BTreeMap<PauliString, f64> = self.terms.iter().map(|&(p, c)| (p, scale * c)).collect();
        *map.entry(PauliString::IDENTITY).or_insert(0.0) += shift;
        Self::from_map(self.n_qubits, map)
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// `y = H x` on the `2^n` register.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        for &(p, c) in &self.terms {
            for (b, &amp) in x.iter().enumerate() {
                if amp.re == 0.0 && amp.im == 0.0 {
                    continue;
                }
                let (out, phase) = p.act(b as u64);
                y[out as usize] += phase * amp * c;
            }
        }
        y
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::Capacity {
                what: "dense Pauli reconstruction qubits",
                requested: self.n_qubits as u128,
                limit: MAX_DENSE_QUBITS as u128,
            });
        }
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for &(p, c) in &self.terms {
            for b in 0..d {
                let (out, phase) = p.act(b as u64);
                m[(out as usize, b)] += phase * c;
            }
        }
        Ok(m)
    }

    /// Brute-force decomposition `c_P = Tr(P H) / 2^n` over all `4^n` strings.
    pub fn from_dense(h: &DMatrix<f64>) -> Result<PauliSum> {
        let d = h.nrows();
        if !d.is_power_of_two() || h.ncols() != d {
            return Err(Error::InvalidParameter(format!("{}x{} is not a qubit operator", d, h.ncols())));
        }
        let n = d.trailing_zeros() as usize;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity {
                what: "dense Pauli decomposition qubits",
                requested: n as u128,
                limit: MAX_DENSE_QUBITS as u128,
            });
        }
        let mut map = BTreeMap::new();
        for x in 0..d as u64 {
            for z in 0..d as u64 {
                let p = PauliString { x, z };
                // Tr(P H) = sum_b <b|P H|b> = sum_b sum_c P_{b c} H_{c b}
                let mut tr = Complex64::new(0.0, 0.0);
                for c in 0..d {
                    let (b, phase) = p.act(c as u64);
                    tr += phase * h[(c, b as usize)];
                }
                let coeff = tr / d as f64;
                if coeff.norm() > COEFF_EPS {
                    map.insert(p, coeff.re);
                }
            }
        }
        Ok(Self::from_map(n, map))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:.6}*{}", p.label(self.n_qubits))?;
        }
        Ok(())
    }
}

fn z_string(lo: usize, hi: usize) -> PauliString {
    // Z on qubits lo+1 .. hi-1
    let mut z = 0u64;
    for q in lo + 1..hi {
        z |= 1 << q;
    }
    PauliString { x: 0, z }
}

/// Jordan-Wigner decomposition of `H(s)` on all `2 * n_sites` modes.
pub fn pauli_decompose(lat: &LatticeSpec, params: &HubbardParams) -> Result<PauliSum> {
    params.validate()?;
    let n_qubits = 2 * lat.n_sites;
    if n_qubits > 64 {
        return Err(Error::Capacity {
            what: "Pauli register qubits",
            requested: n_qubits as u128,
            limit: 64,
        });
    }
    let mut map: BTreeMap<PauliString, f64> = BTreeMap::new();
    let half_t = 0.5 * params.t_hop;
    for &(i, j) in &lat.edges {
        for (a, b) in [(up_mode(i), up_mode(j)), (down_mode(i), down_mode(j))] {
            let (lo, hi) = (a.min(b), a.max(b));
            let string = z_string(lo, hi);
            let xx = PauliString::x(lo).disjoint_mul(string).disjoint_mul(PauliString::x(hi));
            let yy = PauliString::y(lo).disjoint_mul(string).disjoint_mul(PauliString::y(hi));
            *map.entry(xx).or_insert(0.0) += half_t;
            *map.entry(yy).or_insert(0.0) += half_t;
        }
    }
    let quarter_u = 0.25 * params.u * params.s;
    if quarter_u != 0.0 {
        for i in 0..lat.n_sites {
            let (a, b) = (up_mode(i), down_mode(i));
            *map.entry(PauliString::IDENTITY).or_insert(0.0) += quarter_u;
            *map.entry(PauliString::z(a)).or_insert(0.0) -= quarter_u;
            *map.entry(PauliString::z(b)).or_insert(0.0) -= quarter_u;
            *map.entry(PauliString::z(a).disjoint_mul(PauliString::z(b))).or_insert(0.0) += quarter_u;
        }
    }
    Ok(PauliSum::from_map(n_qubits, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fock::fock_hamiltonian_dense;
    use crate::model::lattice::build_lattice;

    #[test]
    fn single_site_coulomb() {
        let lat = build_lattice(1, 1).unwrap();
        let u = 3.0;
        let ps = pauli_decompose(&lat, &HubbardParams::new(u, 1.0)).unwrap();
        assert_eq!(ps.len(), 4);
        let c = |l: &str| ps.coefficient(&PauliString::from_label(l).unwrap());
        assert_eq!(c("II"), u / 4.0);
        assert_eq!(c("ZI"), -u / 4.0);
        assert_eq!(c("IZ"), -u / 4.0);
        assert_eq!(c("ZZ"), u / 4.0);
        assert_eq!(ps.one_norm, u);
    }

    #[test]
    fn adjacent_mode_hopping() {
        // 2x1 at s = 0: the up bond couples modes 0 and 2 across mode 1
        let lat = build_lattice(2, 1).unwrap();
        let ps = pauli_decompose(&lat, &HubbardParams::new(4.0, 0.0)).unwrap();
        let c = |l: &str| ps.coefficient(&PauliString::from_label(l).unwrap());
        assert_eq!(c("XZXI"), 0.5);
        assert_eq!(c("YZYI"), 0.5);
        assert_eq!(c("IXZX"), 0.5);
        assert_eq!(c("IYZY"), 0.5);
        assert_eq!(ps.len(), 4);
    }

    #[test]
    fn reconstruction_matches_fock_matrix() {
        for (m, k, s) in [(2, 1, 1.0), (3, 1, 0.4), (2, 2, 0.8)] {
            let lat = build_lattice(m, k).unwrap();
            let params = HubbardParams::new(5.0, s);
            let ps = pauli_decompose(&lat, &params).unwrap();
            let dense = ps.to_dense().unwrap();
            let fock = fock_hamiltonian_dense(&lat, &params).unwrap();
            let err = dense
                .iter()
                .zip(fock.iter())
                .map(|(a, &b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "{m}x{k}: {err}");
        }
    }

    #[test]
    fn trace_route_agrees_with_symbolic_route() {
        let lat = build_lattice(3, 1).unwrap();
        let params = HubbardParams::new(4.0, 0.6);
        let symbolic = pauli_decompose(&lat, &params).unwrap();
        let traced = PauliSum::from_dense(&fock_hamiltonian_dense(&lat, &params).unwrap()).unwrap();
        assert_eq!(symbolic.len(), traced.len());
        for ((p, a), (q, b)) in symbolic.terms.iter().zip(&traced.terms) {
            assert_eq!(p, q);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_norm_bounds_spectrum() {
        let lat = build_lattice(2, 2).unwrap();
        let ps = pauli_decompose(&lat, &HubbardParams::new(8.0, 1.0)).unwrap();
        let fock = fock_hamiltonian_dense(&lat, &HubbardParams::new(8.0, 1.0)).unwrap();
        let radius = fock.symmetric_eigenvalues().amax();
        assert!(ps.one_norm >= radius);
    }

    #[test]
    fn affine_shifts_identity() {
        let lat = build_lattice(1, 1).unwrap();
        let ps = pauli_decompose(&lat, &HubbardParams::new(4.0, 1.0)).unwrap();
        let shifted = ps.affine(-0.5, 1.0);
        assert_eq!(shifted.coefficient(&PauliString::IDENTITY), 0.5);
        assert_eq!(shifted.coefficient(&PauliString::from_label("ZZ").unwrap()), -0.5);
    }

    #[test]
    fn y_phases() {
        let y = PauliString::y(0);
        assert_eq!(y.act(0), (1, Complex64::new(0.0, 1.0)));
        assert_eq!(y.act(1), (0, Complex64::new(0.0, -1.0)));
    }
}
