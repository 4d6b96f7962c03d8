//! The Lindblad generator
//!
//! ```text
//! L(rho) = -i[H, rho] + sum_l 2 F rho F^† - F^†F rho - rho F^†F
//! ```
//!
//! as an explicit matrix on row-stacked operators, its Heisenberg adjoint,
//! and its spectrum. Rates live inside the jump operators.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{
    adjoint_mat, conj_mat,
    commutator, HilbertSpace, Operator, SuperOperator, SuperVector, C64, I, ZERO,
};

/// Hamiltonian plus jump operators on a declared space.
#[derive(Clone, Debug)]
pub struct Model {
    name: String,
    space: HilbertSpace,
    hamiltonian: Operator,
    jumps: Vec<Operator>,
}

impl Model {
    pub const HERMITIAN_TOL: f64 = 1e-10;

    pub fn new(space: HilbertSpace, hamiltonian: Operator, jumps: Vec<Operator>) -> Result<Self> {
        let n = space.dim();
        for op in std::iter::once(&hamiltonian).chain(jumps.iter()) {
            if op.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: op.dim(),
                });
            }
        }
        let deviation = hamiltonian.hermitian_deviation();
        if deviation >= Self::HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Model {
            name: String::from("model"),
            space,
            hamiltonian,
            jumps,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    /// `L(rho)` evaluated with operator products.
    pub fn lindblad_rhs(&self, rho: &Operator) -> Operator {
        let mut out = commutator(&self.hamiltonian, rho).scale(-I);
        for f in &self.jumps {
            let fd = f.adjoint();
            let fdf = &fd * f;
            out += &(&(f * rho) * &fd).scale(C64::new(2.0, 0.0));
            out -= &(&fdf * rho);
            out -= &(rho * &fdf);
        }
        out
    }

    /// `L^†(J)` evaluated with operator products.
    pub fn adjoint_rhs(&self, j: &Operator) -> Operator {
        let mut out = commutator(&self.hamiltonian, j).scale(I);
        for f in &self.jumps {
            let fd = f.adjoint();
            let fdf = &fd * f;
            out += &(&(&fd * j) * f).scale(C64::new(2.0, 0.0));
            out -= &(&fdf * j);
            out -= &(j * &fdf);
        }
        out
    }
}

/// Restriction of a model to a pair of invariant subspaces, in the form
/// needed to assemble a generator block.
pub(crate) struct BlockOps {
    pub h: Mat<C64>,
    pub f: Vec<Mat<C64>>,
    pub fdf: Vec<Mat<C64>>,
}

impl BlockOps {
    pub fn full(model: &Model) -> BlockOps {
        BlockOps {
            h: model.hamiltonian.as_mat().to_owned(),
            f: model.jumps.iter().map(|f| f.as_mat().to_owned()).collect(),
            fdf: model
                .jumps
                .iter()
                .map(|f| (&f.adjoint() * f).into_mat())
                .collect(),
        }
    }

    /// Compression `V^† X V` of every operator onto the columns of `v`.
    pub fn compress(model: &Model, v: faer::MatRef<'_, C64>) -> BlockOps {
        let c = |x: &Operator| -> Mat<C64> { v.adjoint() * x.as_mat() * v };
        BlockOps {
            h: c(&model.hamiltonian),
            f: model.jumps.iter().map(&c).collect(),
            fdf: model.jumps.iter().map(|f| c(&(&f.adjoint() * f))).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
}

/// `dst += c * (A ⊗ B)` for square `A`, `B`.
fn add_kron(dst: &mut Mat<C64>, c: C64, a: faer::MatRef<'_, C64>, b: faer::MatRef<'_, C64>) {
    let (na, nb) = (a.nrows(), b.nrows());
    for k in 0..na {
        for i in 0..na {
            let aik = c * a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for l in 0..nb {
                let col = k * nb + l;
                for j in 0..nb {
                    let blj = b[(j, l)];
                    if blj != ZERO {
                        dst[(i * nb + j, col)] += aik * blj;
                    }
                }
            }
        }
    }
}

/// `dst += c * (A ⊗ I_nb)`.
fn add_kron_left(dst: &mut Mat<C64>, c: C64, a: faer::MatRef<'_, C64>, nb: usize) {
    let na = a.nrows();
    for k in 0..na {
        for i in 0..na {
            let aik = c * a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..nb {
                dst[(i * nb + j, k * nb + j)] += aik;
            }
        }
    }
}

/// `dst += c * (I_na ⊗ B)`.
fn add_kron_right(dst: &mut Mat<C64>, c: C64, na: usize, b: faer::MatRef<'_, C64>) {
    let nb = b.nrows();
    for i in 0..na {
        for l in 0..nb {
            for j in 0..nb {
                let blj = b[(j, l)];
                if blj != ZERO {
                    dst[(i * nb + j, i * nb + l)] += c * blj;
                }
            }
        }
    }
}

/// Generator acting on operators `X` mapping the `right` space into the
/// `left` space, `X -> L(X)`.
pub(crate) fn generator_block(left: &BlockOps, right: &BlockOps) -> Mat<C64> {
    let (na, nb) = (left.dim(), right.dim());
    let mut m = Mat::zeros(na * nb, na * nb);
    add_kron_left(&mut m, -I, left.h.as_ref(), nb);
    add_kron_right(&mut m, I, na, conj_mat(right.h.as_ref()).as_ref());
    for k in 0..left.f.len() {
        add_kron(
            &mut m,
            C64::new(2.0, 0.0),
            left.f[k].as_ref(),
            conj_mat(right.f[k].as_ref()).as_ref(),
        );
        add_kron_left(&mut m, C64::new(-1.0, 0.0), left.fdf[k].as_ref(), nb);
        add_kron_right(&mut m, C64::new(-1.0, 0.0), na, conj_mat(right.fdf[k].as_ref()).as_ref());
    }
    m
}

/// Heisenberg generator on the same block, `J -> L^†(J)`.
pub(crate) fn adjoint_block(left: &BlockOps, right: &BlockOps) -> Mat<C64> {
    let (na, nb) = (left.dim(), right.dim());
    let mut m = Mat::zeros(na * nb, na * nb);
    add_kron_left(&mut m, I, left.h.as_ref(), nb);
    add_kron_right(&mut m, -I, na, right.h.transpose());
    for k in 0..left.f.len() {
        add_kron(
            &mut m,
            C64::new(2.0, 0.0),
            adjoint_mat(left.f[k].as_ref()).as_ref(),
            right.f[k].transpose(),
        );
        add_kron_left(&mut m, C64::new(-1.0, 0.0), left.fdf[k].as_ref(), nb);
        add_kron_right(&mut m, C64::new(-1.0, 0.0), na, right.fdf[k].transpose());
    }
    m
}

/// A model together with its generator matrix.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    model: Model,
    matrix: SuperOperator,
}

impl Liouvillian {
    pub fn new(model: Model) -> Self {
        let ops = BlockOps::full(&model);
        let matrix = SuperOperator::from_mat(generator_block(&ops, &ops));
        Liouvillian { model, matrix }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn matrix(&self) -> &SuperOperator {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Heisenberg generator built from its own formula.
    pub fn adjoint_matrix(&self) -> SuperOperator {
        build_adjoint(&self.model)
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        apply(self, rho)
    }

    pub fn apply_adjoint(&self, j: &Operator) -> Result<Operator> {
        if j.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: j.dim(),
            });
        }
        Ok(self.model.adjoint_rhs(j))
    }

    /// Default zero threshold `1e-9 * max(1, ||L||_max)`.
    pub fn tol_zero(&self) -> f64 {
        Tolerances::default().zero(self)
    }
}

pub fn build_liouvillian(model: Model) -> Liouvillian {
    Liouvillian::new(model)
}

pub fn build_adjoint(model: &Model) -> SuperOperator {
    let ops = BlockOps::full(model);
    SuperOperator::from_mat(adjoint_block(&ops, &ops))
}

/// Largest entry of the generator matrix, computed without forming it.
pub fn generator_norm_max(model: &Model) -> f64 {
    let n = model.dim();
    let h = model.hamiltonian();
    let fs = model.jumps();
    let fdf: Vec<Operator> = fs.iter().map(|f| &f.adjoint() * f).collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let mut v = ZERO;
                    for (f, g) in fs.iter().zip(&fdf) {
                        v += 2.0 * f.get(i, k) * f.get(j, l).conj();
                        if j == l {
                            v -= g.get(i, k);
                        }
                        if i == k {
                            v -= g.get(j, l).conj();
                        }
                    }
                    if j == l {
                        v -= I * h.get(i, k);
                    }
                    if i == k {
                        v += I * h.get(j, l).conj();
                    }
                    worst = worst.max(v.norm());
                }
            }
        }
    }
    worst
}

pub fn apply(l: &Liouvillian, rho: &Operator) -> Result<Operator> {
    if rho.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho.dim(),
        });
    }
    Ok(l.matrix.apply_op(rho))
}

/// Scale-relative thresholds shared by the spectral and nullspace routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues with `|lambda| < zero_scale * max(1, ||L||_max)` count as zero.
    pub zero_scale: f64,
    /// Singular values below `null_rel * sigma_max` span the nullspace.
    pub null_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_scale: 1e-9,
            null_rel: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn zero(&self, l: &Liouvillian) -> f64 {
        self.zero_for_norm(l.matrix().norm_max())
    }

    pub fn zero_for_norm(&self, norm_max: f64) -> f64 {
        self.zero_scale * norm_max.max(1.0)
    }
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub right_eigenvectors: Vec<SuperVector>,
    /// Eigenvectors of the adjoint matrix; entry `k` belongs to the
    /// eigenvalue `conj(eigenvalues[k])` of the adjoint.
    pub left_eigenvectors: Vec<SuperVector>,
    pub gap: f64,
    pub tol: f64,
}

impl Spectrum {
    pub fn zero_count(&self) -> usize {
        self.eigenvalues.iter().filter(|l| l.norm() < self.tol).count()
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Orders eigenvalues by real part descending (reals within `tol` grouped),
/// then imaginary part ascending. Returns the permutation.
pub fn spectral_order(vals: &[C64], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[b].re.total_cmp(&vals[a].re));
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && vals[idx[end - 1]].re - vals[idx[end]].re <= tol {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| vals[a].im.total_cmp(&vals[b].im));
        out.extend(group);
        start = end;
    }
    out
}

/// Smallest decay rate among eigenvalues with `Re < -tol`; `+inf` if none.
pub fn gap_of(vals: &[C64], tol: f64) -> f64 {
    vals.iter()
        .filter(|l| l.re < -tol)
        .map(|l| l.re.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Full eigendecomposition of the generator with left partners taken from
/// the adjoint matrix.
pub fn spectrum(l: &Liouvillian, tol_real: f64) -> Result<Spectrum> {
    let (vals, vecs) = linalg::eig(l.matrix().as_mat())?;
    let adj = l.adjoint_matrix();
    let (avals, avecs) = linalg::eig(adj.as_mat())?;

    let order = spectral_order(&vals, tol_real);
    let n = vals.len();
    let mut used = vec![false; n];
    let mut eigenvalues = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for &k in &order {
        let target = vals[k].conj();
        let partner = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (avals[a] - target).norm().total_cmp(&(avals[b] - target).norm()))
            .expect("adjoint has as many eigenvalues as the generator");
        used[partner] = true;
        eigenvalues.push(vals[k]);
        right.push(SuperVector::from_col(vecs.col(k).to_owned()));
        left.push(SuperVector::from_col(avecs.col(partner).to_owned()));
    }
    let gap = gap_of(&eigenvalues, tol_real);
    Ok(Spectrum {
        eigenvalues,
        right_eigenvectors: right,
        left_eigenvectors: left,
        gap,
        tol: tol_real,
    })
}

/// Eigenvalues only, sorted as in [`spectrum`].
pub fn eigenvalues(l: &Liouvillian, tol_real: f64) -> Result<Vec<C64>> {
    let vals = linalg::eigenvalues(l.matrix().as_mat())?;
    Ok(spectral_order(&vals, tol_real)
        .into_iter()
        .map(|k| vals[k])
        .collect())
}

pub fn dissipation_gap(s: &Spectrum) -> f64 {
    gap_of(&s.eigenvalues, s.tol)
}

/// `vectorize` followed by the generator, for callers holding raw vectors.
pub fn apply_vec(l: &Liouvillian, v: &SuperVector) -> SuperVector {
    l.matrix().apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{embed, hs_inner, pauli_x, pauli_z, ONE};
    use crate::random::{random_density, random_matrix, rng};

    fn qubit_model(h: Operator, jumps: Vec<Operator>) -> Liouvillian {
        Liouvillian::new(Model::new(HilbertSpace::qubits(1), h, jumps).unwrap())
    }

    #[test]
    fn empty_model_gives_zero_generator() {
        let l = qubit_model(Operator::zeros(2), vec![]);
        assert_eq!(l.matrix().norm_max(), 0.0);
    }

    #[test]
    fn pauli_z_commutator_spectrum() {
        let l = qubit_model(pauli_z(), vec![]);
        let s = spectrum(&l, l.tol_zero()).unwrap();
        let mut expected = [C64::new(0.0, -2.0), ZERO, ZERO, C64::new(0.0, 2.0)].to_vec();
        for v in &s.eigenvalues {
            let pos = expected
                .iter()
                .position(|e| (e - v).norm() < 1e-12)
                .expect("unexpected eigenvalue");
            expected.remove(pos);
        }
        assert!(s.gap.is_infinite());
    }

    #[test]
    fn dephasing_generator_values() {
        let l = qubit_model(Operator::zeros(2), vec![pauli_z()]);
        let out = apply(&l, &Operator::matrix_unit(2, 0, 1)).unwrap();
        assert!((&out - &Operator::matrix_unit(2, 0, 1).scale(C64::new(-4.0, 0.0))).norm_max() < 1e-14);
        let mixed = Operator::identity(2).scale(C64::new(0.5, 0.0));
        assert!(apply(&l, &mixed).unwrap().norm_max() < 1e-15);
        assert!(l.apply_adjoint(&pauli_z()).unwrap().norm_max() < 1e-15);

        let s = spectrum(&l, l.tol_zero()).unwrap();
        let re: Vec<f64> = s.eigenvalues.iter().map(|v| v.re).collect();
        for (got, want) in re.iter().zip([0.0, 0.0, -4.0, -4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((dissipation_gap(&s) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_matches_operator_products_and_adjoint_pairs() {
        let mut r = rng(21);
        let space = HilbertSpace::qubits(2);
        let h = crate::random::random_hermitian(&mut r, 4);
        let jumps = vec![random_matrix(&mut r, 4), embed(1, &pauli_x(), &space).unwrap()];
        let l = Liouvillian::new(Model::new(space, h, jumps).unwrap());
        let adj = l.adjoint_matrix();
        for _ in 0..20 {
            let rho = random_matrix(&mut r, 4);
            let j = random_matrix(&mut r, 4);
            let direct = l.model().lindblad_rhs(&rho);
            assert!((&apply(&l, &rho).unwrap() - &direct).norm_max() < 1e-11);
            let lj = adj.apply_op(&j);
            assert!((&lj - &l.model().adjoint_rhs(&j)).norm_max() < 1e-11);
            let lhs = hs_inner(&j, &direct).unwrap();
            let rhs = hs_inner(&lj, &rho).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
        let rho = random_density(&mut r, 4);
        assert!(apply(&l, rho.as_operator()).unwrap().trace().norm() < 1e-12);
        assert!(l.apply_adjoint(&Operator::identity(4)).unwrap().norm_max() < 1e-12);
        let _ = ONE;
    }

    #[test]
    fn model_rejects_bad_input() {
        let space = HilbertSpace::qubits(1);
        assert!(matches!(
            Model::new(space.clone(), random_matrix(&mut rng(1), 2), vec![]),
            Err(Error::NonHermitian { .. })
        ));
        assert!(matches!(
            Model::new(space, Operator::zeros(2), vec![Operator::zeros(3)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ordering_groups_real_parts() {
        let vals = vec![
            C64::new(-1.0, 1.0),
            C64::new(-1e-15, 2.0),
            C64::new(0.0, -2.0),
            C64::new(-1.0, -1.0),
        ];
        let order = spectral_order(&vals, 1e-9);
        assert_eq!(order, vec![2, 1, 3, 0]);
    }
}
