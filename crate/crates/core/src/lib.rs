//! Steady states, conserved quantities and asymptotic structure of Lindblad
//! master equations.

pub mod asymptotics;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod liouvillian;
pub mod models;
pub mod modelspec;
pub mod operator;
pub mod random;
pub mod structure;

pub use error::{Error, Result};
pub use operator::{
    annihilation, creation, embed, hs_inner, kron, number, partial_trace, pauli_x, pauli_y,
    pauli_z, sigma_minus, sigma_plus, vectorize, devectorize, DensityMatrix, Factor, FactorKind,
    HilbertSpace, Operator, SuperOperator, SuperVector, C64,
};
pub use asymptotics::{
    asymptotic_project, conserved_quantities, decompose, decompose_sectors, infinite_time_state,
    steady_basis, AsymptoticDecomposition, RotatingTriple, SectorOptions,
};
pub use evolve::{heisenberg_propagate, propagate, Propagator};
pub use liouvillian::{build_liouvillian, spectrum, Liouvillian, Model, Spectrum, Tolerances};
pub use modelspec::{load_model, parse_model, SpecError};
pub use structure::{block_structure, BlockStructure, SectorMap};
