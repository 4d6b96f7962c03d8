//! Dense operators on a finite Hilbert space and their images in Liouville
//! space.
//!
//! Vectorization is row-stacking: entry `(i, j)` of an `N x N` operator sits
//! at index `i * N + j`. Under this convention `F rho G` maps to
//! `(F ⊗ G^T) |rho>>`, so the dissipator term `F rho F^†` becomes `F ⊗ F^*`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use faer::{Col, Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Qubit,
    Fock,
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorKind::Qubit => f.write_str("qubit"),
            FactorKind::Fock => f.write_str("fock"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub kind: FactorKind,
    pub dim: usize,
}

impl Factor {
    pub fn qubit() -> Self {
        Factor {
            kind: FactorKind::Qubit,
            dim: 2,
        }
    }

    pub fn fock(dim: usize) -> Self {
        Factor {
            kind: FactorKind::Fock,
            dim,
        }
    }
}

/// Ordered tensor product of qubit and truncated Fock factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("no factors declared".into()));
        }
        for (k, f) in factors.iter().enumerate() {
            match f.kind {
                FactorKind::Qubit if f.dim != 2 => {
                    return Err(Error::InvalidSpace(format!(
                        "factor {k}: qubit must have dim 2, got {}",
                        f.dim
                    )))
                }
                FactorKind::Fock if f.dim < 2 => {
                    return Err(Error::InvalidSpace(format!(
                        "factor {k}: fock dim must be >= 2, got {}",
                        f.dim
                    )))
                }
                _ => {}
            }
        }
        Ok(HilbertSpace { factors })
    }

    pub fn qubits(n: usize) -> Self {
        HilbertSpace::new(vec![Factor::qubit(); n.max(1)]).expect("qubit factors are valid")
    }

    pub fn fock(dim: usize) -> Result<Self> {
        HilbertSpace::new(vec![Factor::fock(dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    /// Total dimension `N`.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| match x.kind {
                FactorKind::Qubit => "qubit".to_string(),
                FactorKind::Fock => format!("fock({})", x.dim),
            })
            .collect();
        f.write_str(&parts.join(" ⊗ "))
    }
}

/// Square complex matrix acting on a Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: Mat<C64>,
}

impl Operator {
    pub fn from_mat(mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operators are square");
        Operator { mat }
    }

    pub fn zeros(n: usize) -> Self {
        Operator {
            mat: Mat::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Operator {
            mat: Mat::identity(n, n),
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Operator {
            mat: Mat::from_fn(n, n, f),
        }
    }

    /// Builds from row-major real entries. Panics unless `rows` is square.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        Operator::from_fn(n, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        Operator::from_fn(n, |i, j| rows[i][j])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Operator::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// `|i><j|` on an `n`-dimensional space.
    pub fn matrix_unit(n: usize, i: usize, j: usize) -> Self {
        let mut op = Operator::zeros(n);
        op.mat[(i, j)] = ONE;
        op
    }

    /// `|psi><phi|`.
    pub fn outer(psi: &[C64], phi: &[C64]) -> Self {
        assert_eq!(psi.len(), phi.len());
        Operator::from_fn(psi.len(), |i, j| psi[i] * phi[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.mat[(i, j)] = value;
    }

    pub fn as_mat(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn conj(&self) -> Operator {
        Operator {
            mat: self.mat.conjugate().to_owned(),
        }
    }

    pub fn transpose(&self) -> Operator {
        Operator {
            mat: self.mat.transpose().to_owned(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn norm_max(&self) -> f64 {
        self.mat.norm_max()
    }

    pub fn norm_fro(&self) -> f64 {
        self.mat.norm_l2()
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator::from_fn(self.dim(), |i, j| c * self.mat[(i, j)])
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() < tol
    }

    /// `(A + A^†) / 2`.
    pub fn hermitian_part(&self) -> Operator {
        let n = self.dim();
        Operator::from_fn(n, |i, j| 0.5 * (self.mat[(i, j)] + self.mat[(j, i)].conj()))
    }

    pub fn pow(&self, k: u32) -> Operator {
        let mut out = Operator::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn entries_row_major(&self) -> Vec<C64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(self.mat[(i, j)]);
            }
        }
        v
    }

    /// Eigenvalues of a Hermitian operator in ascending order (the lower
    /// triangle is read).
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let ev = self
            .mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        Ok(ev)
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, Mat<C64>)> {
        let evd = self
            .mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let vals = (0..self.dim()).map(|i| evd.S()[i].re).collect();
        Ok((vals, evd.U().to_owned()))
    }
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    &(a * b) - &(b * a)
}

impl Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.mat += &rhs.mat;
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        self.mat -= &rhs.mat;
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl Mul<&Operator> for C64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<Operator> for C64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(C64::new(self, 0.0))
    }
}

impl Mul<Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale(C64::new(self, 0.0))
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        -&self
    }
}

/// Vector in Liouville space (a vectorized operator).
#[derive(Clone, Debug, PartialEq)]
pub struct SuperVector {
    col: Col<C64>,
}

impl SuperVector {
    pub fn from_col(col: Col<C64>) -> Self {
        SuperVector { col }
    }

    pub fn len(&self) -> usize {
        self.col.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.col.nrows() == 0
    }

    pub fn get(&self, i: usize) -> C64 {
        self.col[i]
    }

    pub fn as_col(&self) -> &Col<C64> {
        &self.col
    }

    pub fn into_col(self) -> Col<C64> {
        self.col
    }

    pub fn norm(&self) -> f64 {
        self.col.norm_l2()
    }
}

/// Linear map on Liouville space, an `N^2 x N^2` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    mat: Mat<C64>,
}

impl SuperOperator {
    pub fn from_mat(mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "superoperators are square");
        SuperOperator { mat }
    }

    pub fn zeros(n2: usize) -> Self {
        SuperOperator {
            mat: Mat::zeros(n2, n2),
        }
    }

    /// Dimension of the Liouville space (`N^2`).
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Dimension of the underlying Hilbert space (`N`).
    pub fn hilbert_dim(&self) -> usize {
        isqrt(self.dim()).expect("Liouville dimension is a perfect square")
    }

    pub fn as_mat(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> SuperOperator {
        SuperOperator {
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn norm_max(&self) -> f64 {
        self.mat.norm_max()
    }

    pub fn apply(&self, v: &SuperVector) -> SuperVector {
        SuperVector {
            col: &self.mat * &v.col,
        }
    }

    /// `devectorize(self * vectorize(op))`.
    pub fn apply_op(&self, op: &Operator) -> Operator {
        devectorize(&self.apply(&vectorize(op))).expect("square Liouville vector")
    }
}

pub(crate) fn isqrt(n2: usize) -> Option<usize> {
    let n = (n2 as f64).sqrt().round() as usize;
    (n * n == n2).then_some(n)
}

/// Row-stacking vectorization: `A[i, j]` lands at index `i * N + j`.
pub fn vectorize(a: &Operator) -> SuperVector {
    let n = a.dim();
    SuperVector {
        col: Col::from_fn(n * n, |k| a.mat[(k / n, k % n)]),
    }
}

pub fn devectorize(v: &SuperVector) -> Result<Operator> {
    let n = isqrt(v.len()).ok_or_else(|| Error::DimensionMismatch {
        expected: {
            let r = (v.len() as f64).sqrt().round() as usize;
            r * r
        },
        found: v.len(),
    })?;
    Ok(Operator::from_fn(n, |i, j| v.col[i * n + j]))
}

pub(crate) fn devectorize_slice(v: &[C64]) -> Operator {
    let n = isqrt(v.len()).expect("square Liouville vector");
    Operator::from_fn(n, |i, j| v[i * n + j])
}

/// Hilbert-Schmidt inner product `Tr{A^† B}`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(hs(a, b))
}

/// Unchecked Hilbert-Schmidt inner product for internal use.
pub(crate) fn hs(a: &Operator, b: &Operator) -> C64 {
    let n = a.dim();
    let mut acc = ZERO;
    for j in 0..n {
        for i in 0..n {
            acc += a.mat[(i, j)].conj() * b.mat[(i, j)];
        }
    }
    acc
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator {
        mat: kron_mat(a.as_mat(), b.as_mat()),
    }
}

/// Elementwise complex conjugate as an owned matrix.
pub(crate) fn conj_mat(a: MatRef<'_, C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())
}

/// Conjugate transpose as an owned matrix.
pub(crate) fn adjoint_mat(a: MatRef<'_, C64>) -> Mat<C64> {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub(crate) fn kron_mat(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let mut out = Mat::zeros(a.nrows() * b.nrows(), a.ncols() * b.ncols());
    faer::linalg::kron::kron(out.as_mut(), a, b);
    out
}

/// Places `local` on factor `site`, identity elsewhere.
pub fn embed(site: usize, local: &Operator, space: &HilbertSpace) -> Result<Operator> {
    let factors = space.factors();
    if site >= factors.len() {
        return Err(Error::SiteOutOfRange {
            site,
            factors: factors.len(),
        });
    }
    if local.dim() != factors[site].dim {
        return Err(Error::DimensionMismatch {
            expected: factors[site].dim,
            found: local.dim(),
        });
    }
    let mut out = Operator::identity(1);
    for (k, f) in factors.iter().enumerate() {
        let piece = if k == site {
            local.clone()
        } else {
            Operator::identity(f.dim)
        };
        out = kron(&out, &piece);
    }
    Ok(out)
}

/// Truncated bosonic lowering operator: `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(dim: usize) -> Operator {
    Operator::from_fn(dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

pub fn creation(dim: usize) -> Operator {
    annihilation(dim).adjoint()
}

pub fn number(dim: usize) -> Operator {
    Operator::from_fn(dim, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    })
}

pub fn pauli_x() -> Operator {
    Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> Operator {
    Operator::from_rows(&[vec![ZERO, -I], vec![I, ZERO]])
}

pub fn pauli_z() -> Operator {
    Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `(X + iY) / 2 = |0><1|`.
pub fn sigma_plus() -> Operator {
    Operator::matrix_unit(2, 0, 1)
}

/// `(X - iY) / 2 = |1><0|`.
pub fn sigma_minus() -> Operator {
    Operator::matrix_unit(2, 1, 0)
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their
/// declared order.
pub fn partial_trace(a: &Operator, space: &HilbertSpace, keep: &[usize]) -> Result<Operator> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let dims = space.dims();
    if a.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: a.dim(),
        });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::SiteOutOfRange {
            site: bad,
            factors: dims.len(),
        });
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    // strides of each factor in the full index
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let compose = |kept_idx: usize, env_idx: usize| -> usize {
        let mut full = 0;
        let mut rem = kept_idx;
        for (pos, &k) in kept.iter().enumerate().rev() {
            let d = kept_dims[pos];
            full += (rem % d) * strides[k];
            rem /= d;
        }
        let mut rem = env_idx;
        for (pos, &k) in traced.iter().enumerate().rev() {
            let d = traced_dims[pos];
            full += (rem % d) * strides[k];
            rem /= d;
        }
        full
    };

    Ok(Operator::from_fn(out_dim, |i, j| {
        (0..env_dim)
            .map(|e| a.mat[(compose(i, e), compose(j, e))])
            .sum()
    }))
}

/// Bipartite partial trace over the second factor of `C^n ⊗ C^m`.
pub(crate) fn trace_out_second(a: MatRef<'_, C64>, n: usize, m: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| (0..m).map(|t| a[(i * m + t, j * m + t)]).sum())
}

/// Bipartite partial trace over the first factor of `C^n ⊗ C^m`.
pub(crate) fn trace_out_first(a: MatRef<'_, C64>, n: usize, m: usize) -> Mat<C64> {
    Mat::from_fn(m, m, |s, t| (0..n).map(|i| a[(i * m + s, i * m + t)]).sum())
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(op: Operator) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev >= Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {dev:.3e})"
            )));
        }
        let tr = op.trace();
        if (tr - ONE).norm() >= Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} is not 1"
            )));
        }
        let min = op
            .hermitian_eigenvalues()?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min <= -Self::PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix { op })
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let psi: Vec<C64> = psi.iter().map(|c| c / norm).collect();
        let op = Operator::outer(&psi, &psi).hermitian_part();
        DensityMatrix::new(op)
    }

    /// Computational basis state `|k><k|`.
    pub fn basis_state(n: usize, k: usize) -> Self {
        DensityMatrix {
            op: Operator::matrix_unit(n, k, k),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix {
            op: Operator::identity(n).scale(C64::new(1.0 / n as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }
}

impl AsRef<Operator> for DensityMatrix {
    fn as_ref(&self) -> &Operator {
        &self.op
    }
}

/// Trace distance `||rho - sigma||_1 / 2` between Hermitian operators.
pub fn trace_distance(rho: &Operator, sigma: &Operator) -> Result<f64> {
    let diff = (rho - sigma).hermitian_part();
    Ok(0.5 * diff.hermitian_eigenvalues()?.iter().map(|x| x.abs()).sum::<f64>())
}
