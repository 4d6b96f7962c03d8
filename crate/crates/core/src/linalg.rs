//! Thin wrappers over the dense decompositions used throughout the crate.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::operator::{C64, ONE, ZERO};

pub struct Svd {
    pub u: Mat<C64>,
    /// Singular values in descending order.
    pub s: Vec<f64>,
    pub v: Mat<C64>,
}

fn raw_svd(a: MatRef<'_, C64>, thin: bool) -> Result<Svd> {
    let (u, s_col, v) = if thin {
        let dec = a.thin_svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
        (dec.U().to_owned(), dec.S().column_vector().to_owned(), dec.V().to_owned())
    } else {
        let dec = a.svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
        (dec.U().to_owned(), dec.S().column_vector().to_owned(), dec.V().to_owned())
    };
    let k = a.nrows().min(a.ncols());
    let s: Vec<f64> = (0..k).map(|i| s_col[i].re).collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::Svd("non-finite singular value".into()));
    }
    Ok(Svd { u, s, v })
}

/// The iterative solver occasionally stalls on one orientation of a matrix;
/// the adjoint has the same singular values with `u` and `v` exchanged.
fn robust_svd(a: MatRef<'_, C64>, thin: bool) -> Result<Svd> {
    match raw_svd(a, thin) {
        Ok(d) => Ok(d),
        Err(first) => {
            let adj = a.adjoint().to_owned();
            match raw_svd(adj.as_ref(), thin) {
                Ok(d) => Ok(Svd { u: d.v, s: d.s, v: d.u }),
                Err(_) => Err(first),
            }
        }
    }
}

pub fn svd(a: MatRef<'_, C64>) -> Result<Svd> {
    robust_svd(a, false)
}

/// Economy SVD: `u` has `min(m, n)` columns.
pub fn thin_svd(a: MatRef<'_, C64>) -> Result<Svd> {
    robust_svd(a, true)
}

pub fn singular_values(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let s = a
        .singular_values()
        .map_err(|e| Error::Svd(format!("{e:?}")))?;
    Ok(s)
}

/// Orthonormal basis of a right nullspace together with the full singular
/// value profile (ascending) for diagnostics.
pub struct Nullspace {
    pub basis: Mat<C64>,
    pub profile: Vec<f64>,
}

/// Right nullspace of `a`: right singular vectors with `sigma < rel_tol * sigma_max`.
pub fn nullspace(a: MatRef<'_, C64>, rel_tol: f64) -> Result<Nullspace> {
    let dec = if a.nrows() >= a.ncols() { thin_svd(a)? } else { svd(a)? };
    let n = a.ncols();
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax;
    let mut cols: Vec<usize> = Vec::new();
    for (k, &s) in dec.s.iter().enumerate() {
        if smax == 0.0 || s < cut {
            cols.push(k);
        }
    }
    cols.extend(dec.s.len()..n);
    let basis = Mat::from_fn(n, cols.len(), |i, j| dec.v[(i, cols[j])]);
    let mut profile = dec.s.clone();
    profile.reverse();
    Ok(Nullspace { basis, profile })
}

/// Largest principal angle sine between the column spans of two matrices
/// with orthonormal columns. Returns 1 when the dimensions differ.
pub fn subspace_sin(q1: MatRef<'_, C64>, q2: MatRef<'_, C64>) -> Result<f64> {
    if q1.ncols() != q2.ncols() || q1.nrows() != q2.nrows() {
        return Ok(1.0);
    }
    if q1.ncols() == 0 {
        return Ok(0.0);
    }
    let proj = q1 * (q1.adjoint() * q2);
    let resid = q2 - &proj;
    let s = singular_values(resid.as_ref())?;
    Ok(s.first().copied().unwrap_or(0.0).min(1.0))
}

/// Orthonormal basis for the column span of `a`, rank decided by
/// `sigma > rel_tol * sigma_max`.
pub fn orthonormal_span(a: MatRef<'_, C64>, rel_tol: f64) -> Result<Mat<C64>> {
    if a.ncols() == 0 {
        return Ok(Mat::zeros(a.nrows(), 0));
    }
    let dec = thin_svd(a)?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let rank = dec.s.iter().filter(|&&s| smax > 0.0 && s > rel_tol * smax).count();
    Ok(Mat::from_fn(a.nrows(), rank, |i, j| dec.u[(i, j)]))
}

/// `G^{-1/2}` for a Hermitian positive definite `G`.
pub fn hermitian_inv_sqrt(g: MatRef<'_, C64>) -> Result<Mat<C64>> {
    let n = g.nrows();
    let herm = Mat::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)].conj()));
    let evd = herm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let u = evd.U();
    let s = evd.S().column_vector();
    let mut scaled = u.to_owned();
    for k in 0..n {
        let lam = s[k].re;
        if lam <= 0.0 {
            return Err(Error::SingularGram {
                condition: f64::INFINITY,
                singular_values: (0..n).map(|i| s[i].re).collect(),
            });
        }
        let f = C64::new(1.0 / lam.sqrt(), 0.0);
        for i in 0..n {
            scaled[(i, k)] *= f;
        }
    }
    Ok(&scaled * u.adjoint())
}

pub fn inverse(a: MatRef<'_, C64>) -> Mat<C64> {
    a.partial_piv_lu().inverse()
}

/// Condition number from singular values; infinite for singular input.
pub fn condition(s: &[f64]) -> f64 {
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn eig(a: MatRef<'_, C64>) -> Result<(Vec<C64>, Mat<C64>)> {
    let dec = a
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = dec.S().column_vector();
    let vals: Vec<C64> = (0..a.nrows()).map(|i| s[i]).collect();
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    Ok((vals, dec.U().to_owned()))
}

pub fn eigenvalues(a: MatRef<'_, C64>) -> Result<Vec<C64>> {
    let vals = a
        .eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    Ok(vals)
}

/// Least-squares solution of a real system via the pseudo-inverse.
pub fn lstsq_real(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let m = a.len();
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    let am = Mat::from_fn(m, n, |i, j| C64::new(a[i][j], 0.0));
    let dec = thin_svd(am.as_ref())?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; n];
    for (k, &s) in dec.s.iter().enumerate() {
        if s <= 1e-12 * smax || s == 0.0 {
            continue;
        }
        let coef: C64 = (0..m).map(|i| dec.u[(i, k)].conj() * b[i]).sum::<C64>() / s;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += (dec.v[(j, k)] * coef).re;
        }
    }
    Ok(x)
}

pub fn identity(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}
