use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open-boundary `m x k` rectangular lattice, row-major site indexing.
///
/// Site `(row, col)` has index `row * m + col` with `0 <= col < m` and
/// `0 <= row < k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub m: usize,
    pub k: usize,
    pub n_sites: usize,
    /// Nearest-neighbour bonds `(i, j)` with `i < j`, sorted lexicographically.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeShape {
    Chain,
    Ladder,
    Rectangular,
}

impl LatticeShape {
    pub fn as_str(&self) -> &'static str {
        match self {
            LatticeShape::Chain => "chain",
            LatticeShape::Ladder => "ladder",
            LatticeShape::Rectangular => "rectangular",
        }
    }
}

pub fn build_lattice(m: usize, k: usize) -> Result<LatticeSpec> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidLattice {
            m,
            k,
            reason: "lattice must have at least one site".into(),
        });
    }
    if m < k {
        return Err(Error::InvalidLattice {
            m,
            k,
            reason: "long side m must be >= short side k".into(),
        });
    }
    if m == k && m > 1 {
        log::warn!(
            "{m}x{k} square lattice: extra ground-state degeneracies from discrete symmetries are likely"
        );
    }
    let n_sites = m * k;
    let mut edges = Vec::with_capacity(k * (m - 1) + m * (k - 1));
    for row in 0..k {
        for col in 0..m {
            let i = row * m + col;
            if col + 1 < m {
                edges.push((i, i + 1));
            }
            if row + 1 < k {
                edges.push((i, i + m));
            }
        }
    }
    edges.sort_unstable();
    Ok(LatticeSpec {
        m,
        k,
        n_sites,
        edges,
    })
}

impl LatticeSpec {
    pub fn shape(&self) -> LatticeShape {
        match self.k {
            1 => LatticeShape::Chain,
            2 => LatticeShape::Ladder,
            _ => LatticeShape::Rectangular,
        }
    }

    pub fn is_square(&self) -> bool {
        self.m == self.k && self.m > 1
    }

    pub fn label(&self) -> String {
        format!("{}x{}", self.m, self.k)
    }
}

/// On-site repulsion of twice the coordination number of the bulk lattice:
/// 4 for chains, 6 for ladders, 8 for wider lattices.
pub fn default_coupling(lat: &LatticeSpec) -> f64 {
    match lat.shape() {
        LatticeShape::Chain => 4.0,
        LatticeShape::Ladder => 6.0,
        LatticeShape::Rectangular => 8.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        assert!(build_lattice(1, 1).unwrap().edges.is_empty());
        assert_eq!(build_lattice(3, 2).unwrap().edges.len(), 7);
        assert_eq!(build_lattice(5, 4).unwrap().edges.len(), 31);
    }

    #[test]
    fn rejects_bad_orientation() {
        assert!(matches!(
            build_lattice(2, 3),
            Err(Error::InvalidLattice { .. })
        ));
        assert!(build_lattice(0, 0).is_err());
        assert!(build_lattice(3, 0).is_err());
    }

    #[test]
    fn edges_are_grid_adjacent_and_unique() {
        for (m, k) in [(4, 1), (3, 2), (5, 3), (4, 4)] {
            let lat = build_lattice(m, k).unwrap();
            assert_eq!(lat.edges.len(), k * (m - 1) + m * (k - 1));
            let mut seen = std::collections::HashSet::new();
            for &(i, j) in &lat.edges {
                assert!(i < j);
                assert!(seen.insert((i, j)));
                let (ri, ci) = (i / m, i % m);
                let (rj, cj) = (j / m, j % m);
                assert_eq!(ri.abs_diff(rj) + ci.abs_diff(cj), 1);
            }
            let mut sorted = lat.edges.clone();
            sorted.sort();
            assert_eq!(sorted, lat.edges);
        }
    }

    #[test]
    fn coupling_rule() {
        assert_eq!(default_coupling(&build_lattice(8, 1).unwrap()), 4.0);
        assert_eq!(default_coupling(&build_lattice(6, 2).unwrap()), 6.0);
        assert_eq!(default_coupling(&build_lattice(5, 3).unwrap()), 8.0);
    }
}
