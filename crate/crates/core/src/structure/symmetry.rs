//! Strong, weak and subspace symmetries and conserved-quantity checks.

use faer::Mat;

use crate::asymptotics::AsymptoticDecomposition;
use crate::error::{Error, Result};
use crate::liouvillian::{generator_norm_max, Liouvillian, Model};
use crate::linalg;
use crate::operator::{commutator, hs, Operator, C64, I, ONE, ZERO};

/// Default relative tolerance for every symmetry test.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Largest Hilbert dimension accepted by [`find_symmetry_generators`].
pub const MAX_SYMMETRY_DIM: usize = 16;

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub operator: Operator,
    pub strong: bool,
    pub weak: bool,
    pub conserved: bool,
    pub residuals: Vec<(String, f64)>,
}

/// Largest entry of `L^†(A)` over rows and columns below `dim - margin`.
pub fn conserved_residual(model: &Model, a: &Operator, margin: usize) -> f64 {
    let r = model.adjoint_rhs(a);
    let keep = r.dim().saturating_sub(margin);
    let mut worst = 0.0f64;
    for i in 0..keep {
        for j in 0..keep {
            worst = worst.max(r.get(i, j).norm());
        }
    }
    worst
}

fn relative_scale(a: &Operator, generator_norm: f64) -> f64 {
    a.norm_max().max(f64::MIN_POSITIVE) * generator_norm.max(1.0)
}

/// `||L^†(A)||_max < tol * ||A||_max * max(1, ||L||_max)`.
pub fn check_conserved(a: &Operator, l: &Liouvillian, tol: f64) -> bool {
    conserved_residual(l.model(), a, 0) < tol * relative_scale(a, l.matrix().norm_max())
}

/// Conservation test restricted to Fock levels below `dim - margin`, for
/// quantities that are exact only in the untruncated space.
pub fn check_conserved_interior(a: &Operator, model: &Model, tol: f64, margin: usize) -> bool {
    conserved_residual(model, a, margin) < tol * relative_scale(a, generator_norm_max(model))
}

/// Largest commutator of `A` with the Hamiltonian and the jump operators.
pub fn strong_residual(a: &Operator, model: &Model) -> f64 {
    let mut worst = commutator(a, model.hamiltonian()).norm_max();
    for f in model.jumps() {
        worst = worst.max(commutator(a, f).norm_max());
    }
    worst
}

pub fn check_strong_symmetry(a: &Operator, model: &Model, tol: f64) -> bool {
    let ops_scale = std::iter::once(model.hamiltonian())
        .chain(model.jumps())
        .map(|o| o.norm_max())
        .fold(1.0, f64::max);
    strong_residual(a, model) < tol * a.norm_max().max(f64::MIN_POSITIVE) * ops_scale
}

/// `[A^, L]` with `A^ = A ⊗ I - I ⊗ A^*`, exploiting the tensor structure.
/// Zero entries of `A` are skipped.
pub(crate) fn generator_commutator(a: &Operator, lmat: faer::MatRef<'_, C64>) -> Mat<C64> {
    let n = a.dim();
    let n2 = n * n;
    let mut out: Mat<C64> = Mat::zeros(n2, n2);
    for i in 0..n {
        for k in 0..n {
            let aik = a.get(i, k);
            if aik == ZERO {
                continue;
            }
            let ac = aik.conj();
            for j in 0..n {
                // (A ⊗ I) L: row (i, j) += A_ik row (k, j)
                // (I ⊗ A^*) L: row (j, i) -= conj(A_ik) row (j, k)
                for c in 0..n2 {
                    let v1 = lmat[(k * n + j, c)];
                    let v2 = lmat[(j * n + k, c)];
                    out[(i * n + j, c)] += aik * v1;
                    out[(j * n + i, c)] -= ac * v2;
                }
                // L (A ⊗ I): col (k, j) -= A_ik col (i, j)
                // L (I ⊗ A^*): col (j, k) += conj(A_ik) col (j, i)
                for r in 0..n2 {
                    let w1 = lmat[(r, i * n + j)];
                    let w2 = lmat[(r, j * n + i)];
                    out[(r, k * n + j)] -= aik * w1;
                    out[(r, j * n + k)] += ac * w2;
                }
            }
        }
    }
    out
}

pub fn weak_residual(a: &Operator, l: &Liouvillian) -> f64 {
    generator_commutator(a, l.matrix().as_mat()).norm_max()
}

/// `||[A^, L]||_max < tol * ||A||_max * max(1, ||L||_max)`.
pub fn check_weak_symmetry(a: &Operator, l: &Liouvillian, tol: f64) -> bool {
    weak_residual(a, l) < tol * relative_scale(a, l.matrix().norm_max())
}

pub fn symmetry_report(a: &Operator, l: &Liouvillian, tol: f64) -> SymmetryReport {
    SymmetryReport {
        operator: a.clone(),
        strong: check_strong_symmetry(a, l.model(), tol),
        weak: check_weak_symmetry(a, l, tol),
        conserved: check_conserved(a, l, tol),
        residuals: vec![
            ("strong".into(), strong_residual(a, l.model())),
            ("weak".into(), weak_residual(a, l)),
            ("conserved".into(), conserved_residual(l.model(), a, 0)),
        ],
    }
}

/// Orthonormal Hermitian basis of `N x N` matrices, indexed row-major:
/// diagonal units, symmetric pairs above the diagonal, antisymmetric pairs
/// below it.
fn hermitian_unit(n: usize, slot: usize) -> Operator {
    let (i, j) = (slot / n, slot % n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut op = Operator::zeros(n);
    if i == j {
        op.set(i, i, ONE);
    } else if i < j {
        op.set(i, j, C64::new(s, 0.0));
        op.set(j, i, C64::new(s, 0.0));
    } else {
        op.set(j, i, I * s);
        op.set(i, j, -I * s);
    }
    op
}

fn from_params(n: usize, p: &[f64]) -> Operator {
    let mut acc = Operator::zeros(n);
    for (slot, &x) in p.iter().enumerate() {
        if x != 0.0 {
            acc += &hermitian_unit(n, slot).scale(C64::new(x, 0.0));
        }
    }
    acc
}

fn real_echelon(mut rows: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let len = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..len {
        if rank == rows.len() {
            break;
        }
        let best = (rank..rows.len())
            .max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs()))
            .unwrap();
        if rows[best][c].abs() <= tol {
            continue;
        }
        rows.swap(rank, best);
        let p = rows[rank][c];
        for x in rows[rank].iter_mut() {
            *x /= p;
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] != 0.0 {
                let f = row[c];
                for (x, &pv) in row.iter_mut().zip(&pivot) {
                    *x -= f * pv;
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// Hermitian `A` whose superoperator `A ⊗ I - I ⊗ A^*` commutes with the
/// generator. The first element is `I / sqrt(N)`, the rest are traceless and
/// orthonormal.
pub fn find_symmetry_generators(l: &Liouvillian, tol: f64) -> Result<Vec<Operator>> {
    let n = l.dim();
    if n > MAX_SYMMETRY_DIM {
        return Err(Error::DimensionGuard {
            dim: n,
            limit: MAX_SYMMETRY_DIM,
        });
    }
    let n2 = n * n;
    let rows = 2 * n2 * n2;
    let mut r: Mat<f64> = Mat::zeros(rows, n2);
    for slot in 0..n2 {
        let c = generator_commutator(&hermitian_unit(n, slot), l.matrix().as_mat());
        for col in 0..n2 {
            for row in 0..n2 {
                let v = c[(row, col)];
                let idx = col * n2 + row;
                r[(2 * idx, slot)] = v.re;
                r[(2 * idx + 1, slot)] = v.im;
            }
        }
    }
    let dec = r.thin_svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
    let s = dec.S().column_vector();
    let smax = (0..n2).map(|k| s[k]).fold(0.0, f64::max);
    let v = dec.V();
    let null: Vec<usize> = (0..n2).filter(|&k| smax == 0.0 || s[k] < tol * smax).collect();

    // remove the identity direction, then canonicalize the traceless part
    let inv = 1.0 / (n as f64).sqrt();
    let id: Vec<f64> = (0..n2).map(|k| if k / n == k % n { inv } else { 0.0 }).collect();
    let mut traceless: Vec<Vec<f64>> = null
        .iter()
        .map(|&k| {
            let p: Vec<f64> = (0..n2).map(|i| v[(i, k)]).collect();
            let overlap: f64 = p.iter().zip(&id).map(|(a, b)| a * b).sum();
            p.iter().zip(&id).map(|(a, b)| a - overlap * b).collect()
        })
        .collect();
    traceless = real_echelon(traceless, 1e-8);
    let d = traceless.len();
    let mut out = vec![Operator::identity(n).scale(C64::new(inv, 0.0))];
    if d > 0 {
        let g = Mat::from_fn(d, d, |a, b| {
            C64::new(traceless[a].iter().zip(&traceless[b]).map(|(x, y)| x * y).sum(), 0.0)
        });
        let w = linalg::hermitian_inv_sqrt(g.as_ref())?;
        for k in 0..d {
            let p: Vec<f64> = (0..n2)
                .map(|i| (0..d).map(|a| traceless[a][i] * w[(a, k)].re).sum())
                .collect();
            out.push(from_params(n, &p));
        }
    }
    Ok(out)
}

/// Whether conjugation by `U` maps the steady span into itself.
pub fn subspace_symmetry_check(u: &Operator, dec: &AsymptoticDecomposition, tol: f64) -> Result<bool> {
    let n = u.dim();
    let deviation = (&(&u.adjoint() * u) - &Operator::identity(n)).norm_max();
    if deviation > 1e-10 {
        return Err(Error::NonUnitary { deviation });
    }
    for m in &dec.steady {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found: n,
            });
        }
        let x = &(&u.adjoint() * m) * u;
        let mut resid = x.clone();
        for b in &dec.steady {
            resid -= &b.scale(hs(b, &x));
        }
        if resid.norm_fro() > tol * x.norm_fro().max(f64::MIN_POSITIVE) {
            return Ok(false);
        }
    }
    Ok(true)
}
