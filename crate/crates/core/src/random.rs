//! Seeded random operators for tests, probes and property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{DensityMatrix, Operator, C64};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_c64<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Ginibre matrix with standard normal entries.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> Operator {
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        entries.push(gaussian_c64(rng));
    }
    Operator::from_fn(n, |i, j| entries[i * n + j])
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> Operator {
    random_matrix(rng, n).hermitian_part()
}

/// Normalized state vector with Gaussian amplitudes.
pub fn random_ket<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

/// Full-rank density matrix `G G^† / Tr(G G^†)`.
pub fn random_density<R: Rng>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = random_matrix(rng, n);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    let rho = rho.scale(C64::new(1.0 / tr, 0.0)).hermitian_part();
    DensityMatrix::new(rho).expect("Ginibre state is a valid density matrix")
}
