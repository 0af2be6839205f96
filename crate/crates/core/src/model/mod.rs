//! Hubbard problem instances: lattices, sectors, sparse sector Hamiltonians
//! and full-space Pauli decompositions.

pub mod fock;
pub mod hamiltonian;
pub mod lattice;
pub mod pauli;
pub mod sector;

pub use hamiltonian::{
    build_hamiltonian, CsrMatrix, HubbardParams, HubbardSector, LinearOperator, OperatorMeta,
    SparseOperator, DEFAULT_MAX_DIM,
};
pub use lattice::{build_lattice, default_coupling, LatticeShape, LatticeSpec};
pub use pauli::{pauli_decompose, PauliString, PauliSum};
pub use sector::{doped_sector, sector_dimension, SectorBasis, SectorSpec};
