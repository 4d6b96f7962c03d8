//! Infinite-time behavior from the nullspaces of the generator and its
//! adjoint.
//!
//! The steady operators `M` span the right nullspace of `L`, the conserved
//! quantities `J` span the right nullspace of `L^†`, and after
//! biorthogonalization `Tr{J_mu^† M_nu} = delta` the asymptotic state of any
//! input is `sum_mu Tr{J_mu^† rho} M_mu`. Eigenvalues on the imaginary axis
//! add rotating pairs `(O, S)` with `L(O) = i lambda O` and
//! `L^†(S) = -i lambda S`.

use faer::Mat;

use crate::error::{Error, Result};
use crate::liouvillian::{self, adjoint_block, generator_block, BlockOps, Liouvillian, Model, Tolerances};
use crate::linalg;
use crate::operator::{
    devectorize_slice, hs, vectorize, DensityMatrix, Operator, C64, ONE, ZERO,
};
use crate::structure::SectorMap;

/// Output density matrices may dip this far below zero before failing.
pub const PSD_TOL: f64 = 1e-8;
/// Output trace may deviate this far from one before failing.
pub const TRACE_TOL: f64 = 1e-8;
/// Gram matrices with a larger condition number are treated as singular.
pub const MAX_GRAM_CONDITION: f64 = 1e12;
/// Pivot threshold for the canonical basis reduction.
const PIVOT_TOL: f64 = 1e-8;
/// Relative width of a frequency cluster.
const FREQ_CLUSTER_REL: f64 = 1e-7;

/// One oscillating coherence with its dual.
#[derive(Clone, Debug)]
pub struct RotatingTriple {
    /// `L(O) = i * frequency * O`.
    pub frequency: f64,
    pub o: Operator,
    pub s: Operator,
}

#[derive(Clone, Debug)]
pub struct AsymptoticDecomposition {
    /// Orthonormal basis of the steady operators.
    pub steady: Vec<Operator>,
    /// Conserved quantities with `Tr{J_mu^† M_nu} = delta_mu_nu`.
    pub conserved: Vec<Operator>,
    pub rotating: Vec<RotatingTriple>,
    /// Dissipation gap; `None` when no spectrum was computed.
    pub gap: Option<f64>,
    /// Absolute zero threshold used for eigenvalue classification.
    pub tol_zero: f64,
}

impl AsymptoticDecomposition {
    /// Number of steady operators `D`.
    pub fn dim(&self) -> usize {
        self.steady.len()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.steady.first().map(|m| m.dim()).unwrap_or(0)
    }

    /// `Tr{J_mu^† rho}` for every conserved quantity.
    pub fn coefficients(&self, rho: &Operator) -> Result<Vec<C64>> {
        self.check_dim(rho)?;
        Ok(self.conserved.iter().map(|j| hs(j, rho)).collect())
    }

    /// `sum_mu Tr{J_mu^† rho} M_mu` without density-matrix validation.
    pub fn project_operator(&self, rho: &Operator) -> Result<Operator> {
        let coeffs = self.coefficients(rho)?;
        let mut out = Operator::zeros(rho.dim());
        for (c, m) in coeffs.iter().zip(&self.steady) {
            out += &m.scale(*c);
        }
        Ok(out)
    }

    /// Steady part plus rotating coherences at time `t`, unvalidated.
    pub fn limit_operator(&self, rho: &Operator, t: f64) -> Result<Operator> {
        let mut out = self.project_operator(rho)?;
        for r in &self.rotating {
            let phase = C64::from_polar(1.0, r.frequency * t);
            out += &r.o.scale(phase * hs(&r.s, rho));
        }
        Ok(out)
    }

    fn check_dim(&self, rho: &Operator) -> Result<()> {
        let n = self.hilbert_dim();
        if rho.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rho.dim(),
            });
        }
        Ok(())
    }
}

/// Canonical, orthonormal basis for the span of `vectors`.
///
/// The span is reduced to row echelon form, optionally repaired to be closed
/// under the adjoint, orthonormalized symmetrically and sorted by descending
/// diagonal weight, then by the position of the largest entry.
pub fn canonical_basis(vectors: &[Operator], dagger_closed: bool) -> Result<Vec<Operator>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let mut rows: Vec<Vec<C64>> = vectors.iter().map(|v| v.entries_row_major()).collect();
    rows = echelon(rows);
    if rows.len() != vectors.len() {
        return Err(Error::Nullspace {
            message: format!(
                "basis of {} operators has numerical rank {}",
                vectors.len(),
                rows.len()
            ),
            profile: Vec::new(),
        });
    }
    let mut basis: Vec<Operator> = rows.iter().map(|r| devectorize_slice(r)).collect();
    if dagger_closed && dagger_residual(&basis)? > 1e-9 {
        basis = dagger_repair(&basis)?;
        let rows = echelon(basis.iter().map(|b| b.entries_row_major()).collect());
        basis = rows.iter().map(|r| devectorize_slice(r)).collect();
    }
    let mut basis = lowdin(&basis)?;
    sort_basis(&mut basis);
    Ok(basis)
}

/// Reduced row echelon form with partial pivoting; rows below the pivot
/// threshold are dropped.
fn echelon(mut rows: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    let len = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..len {
        if rank == rows.len() {
            break;
        }
        let (best, mag) = (rank..rows.len())
            .map(|r| (r, rows[r][c].norm()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= PIVOT_TOL {
            continue;
        }
        rows.swap(rank, best);
        let p = rows[rank][c];
        for x in rows[rank].iter_mut() {
            *x /= p;
        }
        rows[rank][c] = ONE;
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank {
                continue;
            }
            let f = row[c];
            if f == ZERO {
                continue;
            }
            for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
            row[c] = ZERO;
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

fn span_matrix(basis: &[Operator]) -> Mat<C64> {
    let n2 = basis.first().map(|b| b.dim() * b.dim()).unwrap_or(0);
    let cols: Vec<Vec<C64>> = basis.iter().map(|b| b.entries_row_major()).collect();
    Mat::from_fn(n2, basis.len(), |i, j| cols[j][i])
}

/// Largest distance of a normalized member adjoint from the span.
pub fn dagger_residual(basis: &[Operator]) -> Result<f64> {
    if basis.is_empty() {
        return Ok(0.0);
    }
    let q = linalg::orthonormal_span(span_matrix(basis).as_ref(), 1e-12)?;
    let mut worst = 0.0f64;
    for b in basis {
        let v = vectorize(&b.adjoint()).into_col();
        let norm = v.norm_l2();
        if norm == 0.0 {
            continue;
        }
        let proj = &q * (q.adjoint() * &v);
        worst = worst.max((&v - &proj).norm_l2() / norm);
    }
    Ok(worst)
}

/// Replaces the span by the best `D`-dimensional span of Hermitian
/// combinations `X + X^†`, `i(X - X^†)`.
fn dagger_repair(basis: &[Operator]) -> Result<Vec<Operator>> {
    let d = basis.len();
    let mut herm = Vec::with_capacity(2 * d);
    for b in basis {
        let bd = b.adjoint();
        herm.push(b + &bd);
        herm.push((b - &bd).scale(crate::operator::I));
    }
    let dec = linalg::thin_svd(span_matrix(&herm).as_ref())?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    if dec.s.len() < d || dec.s[d - 1] <= 1e-6 * smax {
        return Err(Error::Nullspace {
            message: "span cannot be made closed under the adjoint".into(),
            profile: dec.s.clone(),
        });
    }
    let n2 = dec.u.nrows();
    Ok((0..d)
        .map(|k| devectorize_slice(&(0..n2).map(|i| dec.u[(i, k)]).collect::<Vec<_>>()))
        .collect())
}

/// Symmetric orthonormalization `X G^{-1/2}`.
fn lowdin(basis: &[Operator]) -> Result<Vec<Operator>> {
    let d = basis.len();
    let g = Mat::from_fn(d, d, |i, j| hs(&basis[i], &basis[j]));
    let w = linalg::hermitian_inv_sqrt(g.as_ref())?;
    Ok((0..d)
        .map(|k| {
            let mut acc = Operator::zeros(basis[0].dim());
            for (i, b) in basis.iter().enumerate() {
                if w[(i, k)] != ZERO {
                    acc += &b.scale(w[(i, k)]);
                }
            }
            acc
        })
        .collect())
}

fn diagonal_weight(m: &Operator) -> f64 {
    (0..m.dim()).map(|i| m.get(i, i).norm_sqr()).sum()
}

fn leading_index(m: &Operator) -> usize {
    let e = m.entries_row_major();
    let max = e.iter().map(|x| x.norm()).fold(0.0, f64::max);
    e.iter()
        .position(|x| x.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0)
}

fn sort_basis(basis: &mut [Operator]) {
    basis.sort_by(|a, b| {
        let (wa, wb) = (diagonal_weight(a), diagonal_weight(b));
        if (wa - wb).abs() > 1e-9 {
            wb.total_cmp(&wa)
        } else {
            leading_index(a).cmp(&leading_index(b))
        }
    });
}

/// Duals `J = J_raw G^{-†}` with `G_mu_nu = Tr{J_raw_mu^† M_nu}`, so that
/// `Tr{J_mu^† M_nu} = delta_mu_nu`.
pub fn biorthogonalize(m: &[Operator], j_raw: &[Operator]) -> Result<Vec<Operator>> {
    if m.len() != j_raw.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            found: j_raw.len(),
        });
    }
    let d = m.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    let g = Mat::from_fn(d, d, |a, b| hs(&j_raw[a], &m[b]));
    let s = linalg::singular_values(g.as_ref())?;
    let cond = linalg::condition(&s);
    if cond > MAX_GRAM_CONDITION {
        return Err(Error::SingularGram {
            condition: cond,
            singular_values: s,
        });
    }
    let c = linalg::inverse(g.as_ref()).adjoint().to_owned();
    Ok((0..d)
        .map(|mu| {
            let mut acc = Operator::zeros(j_raw[0].dim());
            for (k, jr) in j_raw.iter().enumerate() {
                acc += &jr.scale(c[(k, mu)]);
            }
            acc
        })
        .collect())
}

fn nullspace_ops(
    mat: faer::MatRef<'_, C64>,
    rel: f64,
    lift: &dyn Fn(&[C64]) -> Operator,
) -> Result<(Vec<Operator>, Vec<f64>)> {
    let ns = linalg::nullspace(mat, rel)?;
    let n = ns.basis.nrows();
    let ops = (0..ns.basis.ncols())
        .map(|k| lift(&(0..n).map(|i| ns.basis[(i, k)]).collect::<Vec<_>>()))
        .collect();
    Ok((ops, ns.profile))
}

fn no_steady_state(profile: Vec<f64>) -> Error {
    Error::Nullspace {
        message: "no steady state found; a finite generator always has one".into(),
        profile,
    }
}

/// Orthonormal, canonically ordered basis of the right nullspace of `L`.
pub fn steady_basis(l: &Liouvillian, tol: f64) -> Result<Vec<Operator>> {
    let (raw, profile) = nullspace_ops(l.matrix().as_mat(), tol, &devectorize_slice)?;
    if raw.is_empty() {
        return Err(no_steady_state(profile));
    }
    canonical_basis(&raw, true)
}

/// Orthonormal, canonically ordered basis of the right nullspace of `L^†`.
pub fn conserved_quantities(l: &Liouvillian, tol: f64) -> Result<Vec<Operator>> {
    let (right, rprofile) = nullspace_ops(l.matrix().as_mat(), tol, &devectorize_slice)?;
    let adj = l.adjoint_matrix();
    let (left, lprofile) = nullspace_ops(adj.as_mat(), tol, &devectorize_slice)?;
    if right.len() != left.len() {
        let mut profile = rprofile;
        profile.extend(lprofile);
        return Err(Error::Nullspace {
            message: format!(
                "left nullspace has dimension {} but right nullspace has {}",
                left.len(),
                right.len()
            ),
            profile,
        });
    }
    canonical_basis(&left, true)
}

/// Steady basis, conserved quantities, gap and rotating part of the full
/// generator.
pub fn decompose(l: &Liouvillian, tol: &Tolerances) -> Result<AsymptoticDecomposition> {
    let tol_zero = tol.zero(l);
    let gen = l.matrix().as_mat().to_owned();
    let adj = l.adjoint_matrix().into_mat();
    let vals = linalg::eigenvalues(gen.as_ref())?;
    let part = decompose_block(&gen, &adj, &vals, tol.null_rel, tol_zero, &devectorize_slice)?;
    finish(vec![part], Some(liouvillian::gap_of(&vals, tol_zero)), tol_zero, true)
}

struct BlockPart {
    steady: Vec<Operator>,
    conserved_raw: Vec<Operator>,
    rotating: Vec<RotatingTriple>,
}

fn decompose_block(
    gen: &Mat<C64>,
    adj: &Mat<C64>,
    vals: &[C64],
    null_rel: f64,
    tol_zero: f64,
    lift: &dyn Fn(&[C64]) -> Operator,
) -> Result<BlockPart> {
    let (right, rprofile) = nullspace_ops(gen.as_ref(), null_rel, lift)?;
    let (left, lprofile) = nullspace_ops(adj.as_ref(), null_rel, lift)?;
    if right.len() != left.len() {
        let mut profile = rprofile;
        profile.extend(lprofile);
        return Err(Error::Nullspace {
            message: format!(
                "left nullspace has dimension {} but right nullspace has {}",
                left.len(),
                right.len()
            ),
            profile,
        });
    }
    let rotating = if vals.is_empty() {
        Vec::new()
    } else {
        rotating_in_block(gen, adj, vals, null_rel, tol_zero, lift)?
    };
    Ok(BlockPart {
        steady: right,
        conserved_raw: left,
        rotating,
    })
}

/// `dagger_closed` is false when the parts cover a sector without its
/// mirror image, so the span cannot be closed under the adjoint.
fn finish(
    parts: Vec<BlockPart>,
    gap: Option<f64>,
    tol_zero: f64,
    dagger_closed: bool,
) -> Result<AsymptoticDecomposition> {
    let mut steady_raw = Vec::new();
    let mut left_raw = Vec::new();
    let mut rotating = Vec::new();
    for p in parts {
        steady_raw.extend(p.steady);
        left_raw.extend(p.conserved_raw);
        rotating.extend(p.rotating);
    }
    if steady_raw.is_empty() {
        return Err(no_steady_state(Vec::new()));
    }
    let steady = canonical_basis(&steady_raw, dagger_closed)?;
    let left = canonical_basis(&left_raw, dagger_closed)?;
    let conserved = biorthogonalize(&steady, &left)?;
    rotating.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(AsymptoticDecomposition {
        steady,
        conserved,
        rotating,
        gap,
        tol_zero,
    })
}

/// Groups values whose consecutive spacing is at most `width`.
fn cluster(sorted: &[f64], width: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some(c) if x - c[c.len() - 1] <= width => c.push(x),
            _ => out.push(vec![x]),
        }
    }
    out
}

fn shifted(a: &Mat<C64>, shift: C64) -> Mat<C64> {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= shift;
    }
    m
}

fn rotating_in_block(
    gen: &Mat<C64>,
    adj: &Mat<C64>,
    vals: &[C64],
    null_rel: f64,
    tol_zero: f64,
    lift: &dyn Fn(&[C64]) -> Operator,
) -> Result<Vec<RotatingTriple>> {
    let mut freqs: Vec<f64> = vals
        .iter()
        .filter(|v| v.re.abs() < tol_zero && v.im.abs() >= tol_zero)
        .map(|v| v.im)
        .collect();
    if freqs.is_empty() {
        return Ok(Vec::new());
    }
    freqs.sort_by(f64::total_cmp);
    let scale = freqs.iter().map(|f| f.abs()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for group in cluster(&freqs, FREQ_CLUSTER_REL * scale) {
        let lambda = group.iter().sum::<f64>() / group.len() as f64;
        if lambda < 0.0 {
            // partners of the positive clusters, added below by adjoint
            continue;
        }
        let (o_raw, oprof) = nullspace_ops(shifted(gen, C64::new(0.0, lambda)).as_ref(), null_rel, lift)?;
        let (s_raw, sprof) = nullspace_ops(shifted(adj, C64::new(0.0, -lambda)).as_ref(), null_rel, lift)?;
        if o_raw.len() != group.len() || s_raw.len() != group.len() {
            let mut profile = oprof;
            profile.extend(sprof);
            return Err(Error::PairingFailure {
                frequency: lambda,
                detail: format!(
                    "{} eigenvalues, {} right and {} left eigenvectors; singular values {:?}",
                    group.len(),
                    o_raw.len(),
                    s_raw.len(),
                    profile
                ),
            });
        }
        let o = canonical_basis(&o_raw, false)?;
        let s = biorthogonalize(&o, &s_raw).map_err(|e| Error::PairingFailure {
            frequency: lambda,
            detail: e.to_string(),
        })?;
        for (ok, sk) in o.into_iter().zip(s) {
            out.push(RotatingTriple {
                frequency: -lambda,
                o: ok.adjoint(),
                s: sk.adjoint(),
            });
            out.push(RotatingTriple {
                frequency: lambda,
                o: ok,
                s: sk,
            });
        }
    }
    Ok(out)
}

/// Purely imaginary eigenpairs of the full generator.
pub fn rotating_decomposition(l: &Liouvillian, tol: f64) -> Result<Vec<RotatingTriple>> {
    let tol_zero = l.tol_zero();
    let gen = l.matrix().as_mat().to_owned();
    let adj = l.adjoint_matrix().into_mat();
    let vals = linalg::eigenvalues(gen.as_ref())?;
    let mut out = rotating_in_block(&gen, &adj, &vals, tol, tol_zero, &devectorize_slice)?;
    out.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(out)
}

/// Options for the sector-reduced decomposition.
#[derive(Clone, Debug)]
pub struct SectorOptions {
    /// Sectors to analyze; `None` analyzes all of them.
    pub sectors: Option<Vec<(usize, usize)>>,
    /// Diagonalize each sector to obtain the gap and rotating part.
    pub spectrum: bool,
    pub tolerances: Tolerances,
}

impl Default for SectorOptions {
    fn default() -> Self {
        SectorOptions {
            sectors: None,
            spectrum: true,
            tolerances: Tolerances::default(),
        }
    }
}

/// Decomposition assembled sector by sector without forming the full
/// generator. The result covers the requested sectors only.
pub fn decompose_sectors(
    model: &Model,
    map: &SectorMap,
    opts: &SectorOptions,
) -> Result<AsymptoticDecomposition> {
    let all: Vec<(usize, usize)> = map.sectors();
    let wanted = opts.sectors.clone().unwrap_or(all);
    let ops: Vec<BlockOps> = map
        .isometries()
        .iter()
        .map(|v| BlockOps::compress(model, v.as_ref()))
        .collect();
    let norm = liouvillian::generator_norm_max(model);
    let tol_zero = opts.tolerances.zero_for_norm(norm);

    let mut parts = Vec::new();
    let mut gap = f64::INFINITY;
    for &(mu, nu) in &wanted {
        if mu >= ops.len() || nu >= ops.len() {
            return Err(Error::SiteOutOfRange {
                site: mu.max(nu),
                factors: ops.len(),
            });
        }
        let gen = generator_block(&ops[mu], &ops[nu]);
        let adj = adjoint_block(&ops[mu], &ops[nu]);
        let vals = if opts.spectrum {
            let v = linalg::eigenvalues(gen.as_ref())?;
            gap = gap.min(liouvillian::gap_of(&v, tol_zero));
            v
        } else {
            Vec::new()
        };
        let vm = map.isometries()[mu].clone();
        let vn = map.isometries()[nu].clone();
        let (a, b) = (vm.ncols(), vn.ncols());
        let lift = move |x: &[C64]| -> Operator {
            let xs = Mat::from_fn(a, b, |i, j| x[i * b + j]);
            Operator::from_mat(&vm * &xs * vn.adjoint())
        };
        parts.push(decompose_block(&gen, &adj, &vals, opts.tolerances.null_rel, tol_zero, &lift)?);
    }
    let mirrored = wanted.iter().all(|&(mu, nu)| wanted.contains(&(nu, mu)));
    finish(parts, opts.spectrum.then_some(gap), tol_zero, mirrored)
}

fn to_density(op: Operator) -> Result<DensityMatrix> {
    settle_density(op, TRACE_TOL, PSD_TOL)
}

/// Validates and repairs a numerically computed state: Hermitian part, trace
/// within `trace_tol`, eigenvalues below `-psd_tol` rejected and smaller
/// negative ones clipped.
pub(crate) fn settle_density(op: Operator, trace_tol: f64, psd_tol: f64) -> Result<DensityMatrix> {
    let h = op.hermitian_part();
    let tr = h.trace();
    if (tr - ONE).norm() > trace_tol {
        return Err(Error::InvalidDensityMatrix(format!(
            "state has trace {tr}"
        )));
    }
    let (vals, vecs) = h.hermitian_eigen()?;
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -psd_tol {
        return Err(Error::InvalidDensityMatrix(format!(
            "state has eigenvalue {min:.3e}"
        )));
    }
    let fixed = if min < 0.0 {
        let n = h.dim();
        let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        Operator::from_fn(n, |i, j| {
            (0..n)
                .map(|k| vecs[(i, k)] * vecs[(j, k)].conj() * (clipped[k] / total))
                .sum()
        })
        .hermitian_part()
    } else {
        h.scale(C64::new(1.0 / tr.re, 0.0))
    };
    DensityMatrix::new(fixed)
}

/// `sum_mu Tr{J_mu^† rho} M_mu`; the rotating part is left out.
pub fn asymptotic_project(dec: &AsymptoticDecomposition, rho: &DensityMatrix) -> Result<DensityMatrix> {
    to_density(dec.project_operator(rho.as_operator())?)
}

/// Steady part plus every rotating coherence advanced to time `t`.
pub fn infinite_time_state(
    dec: &AsymptoticDecomposition,
    rho: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    to_density(dec.limit_operator(rho.as_operator(), t)?)
}
