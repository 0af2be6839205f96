//! Fixed `(n_up, n_down)` particle-number sectors and their bitmask basis.
//!
//! A basis state is a pair of occupation masks. Masks of a given popcount are
//! ranked in increasing numeric order (colexicographic), which the
//! combinatorial number system computes in `O(n_sites)` without a lookup
//! table of states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest site count a mask pair may address (two spin species share a u64
/// Fock word in the interleaved mode ordering).
/// Largest lattice an enumerated basis supports (interleaved Fock words are `u64`).
pub const MAX_SITES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub n_up: usize,
    pub n_down: usize,
    pub n_sites: usize,
}

impl SectorSpec {
    pub fn new(n_sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidSector("sector on zero sites".into()));
        }
        if n_up > n_sites || n_down > n_sites {
            return Err(Error::InvalidSector(format!(
                "({n_up}, {n_down}) electrons do not fit on {n_sites} sites"
            )));
        }
        Ok(Self {
            n_up,
            n_down,
            n_sites,
        })
    }

    pub fn n_electrons(&self) -> usize {
        self.n_up + self.n_down
    }
}

/// Sector for `doping` extra electrons per site above half filling.
///
/// `n_e = round((1 + doping) * n_sites)` with ties rounded up; the odd
/// electron, if any, is spin up.
pub fn doped_sector(n_sites: usize, doping: f64) -> Result<SectorSpec> {
    if !(0.0..1.0).contains(&doping) {
        return Err(Error::InvalidParameter(format!(
            "doping {doping} outside [0, 1)"
        )));
    }
    let n_e = ((1.0 + doping) * n_sites as f64 + 0.5).floor() as usize;
    if n_e > 2 * n_sites {
        return Err(Error::InvalidSector(format!(
            "{n_e} electrons exceed 2 * {n_sites} spin orbitals"
        )));
    }
    SectorSpec::new(n_sites, n_e.div_ceil(2), n_e / 2)
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Sector dimension `C(N, n_up) * C(N, n_down)`, with overflow reported.
pub fn sector_dimension(sec: &SectorSpec) -> Result<u128> {
    let n = sec.n_sites as u64;
    let up = binomial(n, sec.n_up as u64).ok_or(Error::Overflow("C(N, n_up)"))?;
    let down = binomial(n, sec.n_down as u64).ok_or(Error::Overflow("C(N, n_down)"))?;
    up.checked_mul(down).ok_or(Error::Overflow("sector dimension"))
}

/// Enumerated basis of one spin species: all masks of `n_sites` bits with
/// `n_particles` set, in increasing numeric order.
#[derive(Debug, Clone)]
pub struct SpeciesBasis {
    n_sites: usize,
    n_particles: usize,
    states: Vec<u64>,
    // pascal[n][k] = C(n, k) for n <= n_sites, k <= n_particles + 1
    pascal: Vec<Vec<usize>>,
}

impl SpeciesBasis {
    fn new(n_sites: usize, n_particles: usize) -> Self {
        let mut pascal = vec![vec![0usize; n_particles + 2]; n_sites + 1];
        for row in pascal.iter_mut() {
            row[0] = 1;
        }
        for n in 1..=n_sites {
            for k in 1..n_particles + 2 {
                pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
            }
        }
        let count = pascal[n_sites][n_particles];
        let mut states = Vec::with_capacity(count);
        if n_particles == 0 {
            states.push(0);
        } else {
            // Gosper's hack walks same-popcount masks in increasing order
            let limit = 1u64 << n_sites;
            let mut v: u64 = (1u64 << n_particles) - 1;
            while v < limit {
                states.push(v);
                let c = v & v.wrapping_neg();
                let r = v + c;
                v = (((r ^ v) >> 2) / c) | r;
            }
        }
        debug_assert_eq!(states.len(), count);
        Self {
            n_sites,
            n_particles,
            states,
            pascal,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn unrank(&self, index: usize) -> u64 {
        self.states[index]
    }

    /// Colex rank: sum of `C(p_t, t)` over set bits `p_1 < p_2 < ...`.
    pub fn rank(&self, mask: u64) -> usize {
        debug_assert_eq!(mask.count_ones() as usize, self.n_particles);
        let mut rank = 0;
        let mut rest = mask;
        let mut t = 1;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            rank += self.pascal[p][t];
            rest &= rest - 1;
            t += 1;
        }
        rank
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
}

/// Basis of a `(n_up, n_down)` sector; state index `i_up * n_down_states + i_down`.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub sector: SectorSpec,
    up: SpeciesBasis,
    down: SpeciesBasis,
}

impl SectorBasis {
    pub fn new(sector: SectorSpec) -> Self {
        Self {
            up: SpeciesBasis::new(sector.n_sites, sector.n_up),
            down: SpeciesBasis::new(sector.n_sites, sector.n_down),
            sector,
        }
    }

    pub fn len(&self) -> usize {
        self.up.len() * self.down.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn up(&self) -> &SpeciesBasis {
        &self.up
    }

    pub fn down(&self) -> &SpeciesBasis {
        &self.down
    }

    pub fn state(&self, index: usize) -> (u64, u64) {
        let nd = self.down.len();
        (self.up.unrank(index / nd), self.down.unrank(index % nd))
    }

    pub fn index(&self, up: u64, down: u64) -> usize {
        self.up.rank(up) * self.down.len() + self.down.rank(down)
    }
}

/// Interleave spin masks into a Fock word: site `i` up -> mode `2i`, down -> mode `2i + 1`.
pub fn interleave(up: u64, down: u64, n_sites: usize) -> u64 {
    let mut word = 0u64;
    for i in 0..n_sites {
        word |= ((up >> i) & 1) << (2 * i);
        word |= ((down >> i) & 1) << (2 * i + 1);
    }
    word
}

/// Inverse of [`interleave`].
pub fn deinterleave(word: u64, n_sites: usize) -> (u64, u64) {
    let (mut up, mut down) = (0u64, 0u64);
    for i in 0..n_sites {
        up |= ((word >> (2 * i)) & 1) << i;
        down |= ((word >> (2 * i + 1)) & 1) << i;
    }
    (up, down)
}
