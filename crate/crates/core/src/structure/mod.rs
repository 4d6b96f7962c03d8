//! Symmetry sectors, symmetry checks and the block structure of the limit set.

mod blocks;
mod sectors;
mod symmetry;

pub use blocks::{
    block_structure, extract_rotation_hamiltonian, solve_energy_differences, Block,
    BlockStructure, DEFAULT_SEED, ENERGY_TOL, MAX_RETRIES, RECONSTRUCTION_TOL,
};
pub use sectors::{computational_partition, parity_partition, parity_partition_model, SectorMap};
pub use symmetry::{
    check_conserved, check_conserved_interior, check_strong_symmetry, check_weak_symmetry,
    conserved_residual, find_symmetry_generators, strong_residual, subspace_symmetry_check,
    symmetry_report, weak_residual, SymmetryReport, MAX_SYMMETRY_DIM, SYMMETRY_TOL,
};
