//! Fermionic operators on Fock words (bit `a` = occupation of mode `a`).
//!
//! Modes are ordered site-major with spin interleaved: site `i` up is mode
//! `2i`, site `i` down is mode `2i + 1`. Annihilating mode `q` picks up the
//! parity of the occupied modes below `q`, the Jordan-Wigner convention.

use nalgebra::DMatrix;

use super::hamiltonian::HubbardParams;
use super::lattice::LatticeSpec;
use super::sector::SectorBasis;
use crate::error::{Error, Result};

/// Largest lattice for which the dense full Fock-space matrix is built.
pub const MAX_FOCK_SITES: usize = 5;

pub fn up_mode(site: usize) -> usize {
    2 * site
}

pub fn down_mode(site: usize) -> usize {
    2 * site + 1
}

#[inline]
fn parity_below(word: u64, mode: usize) -> bool {
    (word & ((1u64 << mode) - 1)).count_ones() & 1 == 1
}

/// `c_p^dagger c_q |word>`, or `None` when it vanishes.
#[inline]
pub fn hop(word: u64, p: usize, q: usize) -> Option<(u64, f64)> {
    if word >> q & 1 == 0 {
        return None;
    }
    let mid = word ^ (1u64 << q);
    if mid >> p & 1 == 1 {
        return None;
    }
    let odd = parity_below(word, q) ^ parity_below(mid, p);
    Some((mid | (1u64 << p), if odd { -1.0 } else { 1.0 }))
}

/// Number of doubly occupied sites in a Fock word.
pub fn double_occupancy(word: u64, n_sites: usize) -> u32 {
    (0..n_sites)
        .filter(|&i| word >> up_mode(i) & 1 == 1 && word >> down_mode(i) & 1 == 1)
        .count() as u32
}

/// Dense Hubbard matrix on the full `4^N` Fock space.
pub fn fock_hamiltonian_dense(lat: &LatticeSpec, params: &HubbardParams) -> Result<DMatrix<f64>> {
    let n = lat.n_sites;
    if n > MAX_FOCK_SITES {
        return Err(Error::Capacity {
            what: "dense Fock space sites",
            requested: n as u128,
            limit: MAX_FOCK_SITES as u128,
        });
    }
    let dim = 1usize << (2 * n);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let coulomb = params.u * params.s;
    for word in 0..dim as u64 {
        let col = word as usize;
        h[(col, col)] += coulomb * double_occupancy(word, n) as f64;
        for &(i, j) in &lat.edges {
            for (a, b) in [
                (up_mode(i), up_mode(j)),
                (down_mode(i), down_mode(j)),
            ] {
                for (p, q) in [(a, b), (b, a)] {
                    if let Some((out, sign)) = hop(word, p, q) {
                        h[(out as usize, col)] += params.t_hop * sign;
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Place a sector vector into the full Fock space (index = Fock word).
pub fn embed_in_fock(basis: &SectorBasis, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            left: v.len(),
            right: basis.len(),
        });
    }
    let n = basis.sector.n_sites;
    if n > MAX_FOCK_SITES {
        return Err(Error::Capacity {
            what: "Fock embedding sites",
            requested: n as u128,
            limit: MAX_FOCK_SITES as u128,
        });
    }
    let mut out = vec![0.0; 1usize << (2 * n)];
    for (idx, &amp) in v.iter().enumerate() {
        let (up, down) = basis.state(idx);
        out[super::sector::interleave(up, down, n) as usize] = amp;
    }
    Ok(out)
}
