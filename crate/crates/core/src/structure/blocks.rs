//! Block decomposition of the limit set,
//!
//! ```text
//! rho_inf = ⊕_k U_k (rho_k ⊗ T_k) U_k^†
//! ```
//!
//! with an `n_k`-dimensional information-carrying factor, a fixed
//! `m_k`-dimensional factor state `T_k`, and rotation energies `E_mu` such
//! that oscillation frequencies are differences `E_nu - E_mu`.
//!
//! The algebra generated by the limit set (conjugated by `rho*^{-1/2}`, with
//! `rho*` the asymptotic image of the maximally mixed state) is a direct sum
//! of `M_n ⊗ I_m`. A random element of its commutant, obtained by twirling a
//! random Hermitian matrix over an orthonormal basis of the algebra, splits
//! the blocks and the factor copies; its projection back onto the algebra is
//! central and labels the blocks.

use faer::Mat;

use crate::asymptotics::{AsymptoticDecomposition, RotatingTriple};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{
    trace_out_first, trace_out_second, DensityMatrix, Operator, C64, I, ONE, ZERO,
};
use crate::random::{gaussian_c64, rng};

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const MAX_RETRIES: u64 = 8;
const SUPPORT_REL: f64 = 1e-10;
const CLUSTER_REL: f64 = 1e-8;
const CLOSURE_REL: f64 = 1e-8;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
pub const ENERGY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Block {
    pub n: usize,
    pub m: usize,
    /// Factor state `T`, an `m x m` density matrix.
    pub factor_state: DensityMatrix,
    /// `N x (n m)` isometry; column `mu * m + t` is `U |mu> ⊗ |t>`.
    pub basis: Mat<C64>,
    /// Rotation energies with `min = 0`, one per `mu`.
    pub energies: Vec<f64>,
}

impl Block {
    /// Coefficient matrix `Tr_m[U^† X U]` of an operator in this block.
    pub fn coefficients(&self, x: &Operator) -> Mat<C64> {
        let c = self.basis.adjoint() * x.as_mat() * &self.basis;
        trace_out_second(c.as_ref(), self.n, self.m)
    }

    /// `U (c ⊗ T) U^†`.
    pub fn embed(&self, c: faer::MatRef<'_, C64>) -> Operator {
        let t = self.factor_state.as_operator().as_mat();
        let ct = crate::operator::kron_mat(c, t);
        Operator::from_mat(&self.basis * ct * self.basis.adjoint())
    }

    fn first_index(&self) -> usize {
        (0..self.basis.nrows())
            .find(|&i| (0..self.basis.ncols()).any(|k| self.basis[(i, k)].norm() > 1e-8))
            .unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Debug)]
pub struct BlockStructure {
    pub blocks: Vec<Block>,
    pub support_dim: usize,
}

impl BlockStructure {
    /// `sum_k n_k^2`, the number of independent limit-set operators.
    pub fn capacity(&self) -> usize {
        self.blocks.iter().map(|b| b.n * b.n).sum()
    }

    /// Reassembles an operator from its block coefficients.
    pub fn reconstruct(&self, x: &Operator) -> Operator {
        let mut out = Operator::zeros(x.dim());
        for b in &self.blocks {
            out += &b.embed(b.coefficients(x).as_ref());
        }
        out
    }
}

fn frob(a: &Mat<C64>, b: &Mat<C64>) -> C64 {
    let mut acc = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc
}

/// Adds the component of `x` orthogonal to `basis` if it exceeds
/// `CLOSURE_REL * scale`.
fn extend(basis: &mut Vec<Mat<C64>>, x: &Mat<C64>, scale: f64) -> bool {
    if scale == 0.0 {
        return false;
    }
    let mut r = x.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = frob(b, &r);
            r -= faer::Scale(c) * b;
        }
    }
    let rn = r.norm_l2();
    if rn > CLOSURE_REL * scale {
        basis.push(faer::Scale(C64::new(1.0 / rn, 0.0)) * &r);
        true
    } else {
        false
    }
}

/// Orthonormal basis of the *-algebra generated by `gens`.
fn algebra_closure(gens: &[Mat<C64>], max_iter: usize) -> Result<Vec<Mat<C64>>> {
    let mut basis = Vec::new();
    for g in gens {
        let norm = g.norm_l2();
        extend(&mut basis, g, norm);
        extend(&mut basis, &g.adjoint().to_owned(), norm);
    }
    let r = gens.first().map(|g| g.nrows()).unwrap_or(0);
    for _ in 0..max_iter.max(1) {
        let before = basis.len();
        let snapshot = basis.clone();
        for a in &snapshot {
            for b in &snapshot {
                // products of unit elements: absolute threshold
                extend(&mut basis, &(a * b), 1.0);
                if basis.len() == r * r {
                    return Ok(basis);
                }
            }
        }
        if basis.len() == before {
            return Ok(basis);
        }
    }
    Err(Error::BlockStructure(format!(
        "algebra closure did not stabilize within {max_iter} iterations"
    )))
}

/// `sum_k a_k X a_k^†`, which lies in the commutant of the algebra.
fn twirl(basis: &[Mat<C64>], x: &Mat<C64>) -> Mat<C64> {
    let r = x.nrows();
    let mut out = Mat::zeros(r, r);
    for a in basis {
        out += a * x * a.adjoint();
    }
    out
}

fn project_onto(basis: &[Mat<C64>], x: &Mat<C64>) -> Mat<C64> {
    let r = x.nrows();
    let mut out = Mat::zeros(r, r);
    for a in basis {
        out += faer::Scale(frob(a, x)) * a;
    }
    out
}

fn random_square(seed: u64, r: usize, hermitian: bool) -> Mat<C64> {
    let mut g = rng(seed);
    let x = Mat::from_fn(r, r, |_, _| gaussian_c64(&mut g));
    if hermitian {
        Mat::from_fn(r, r, |i, j| 0.5 * (x[(i, j)] + x[(j, i)].conj()))
    } else {
        x
    }
}

/// Eigenvectors of a Hermitian matrix grouped into clusters of nearly equal
/// eigenvalues, in ascending order.
fn eigen_clusters(h: &Mat<C64>) -> Result<Vec<(f64, Mat<C64>)>> {
    let n = h.nrows();
    let herm = Operator::from_mat(h.clone()).hermitian_part();
    let (vals, vecs) = herm.hermitian_eigen()?;
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if vals[k] - vals[*g.last().unwrap()] <= CLUSTER_REL * scale => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&k| vals[k]).sum::<f64>() / g.len() as f64;
            (mean, Mat::from_fn(n, g.len(), |i, j| vecs[(i, g[j])]))
        })
        .collect())
}

fn weights(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + std::f64::consts::PI).sqrt()).collect()
}

struct RawBlock {
    n: usize,
    m: usize,
    /// Columns in the support basis, `r x (n m)`.
    cols: Mat<C64>,
}

/// Splits the algebra into blocks with one seeded probe.
fn split_blocks(alg: &[Mat<C64>], r: usize, seed: u64) -> Result<Option<Vec<RawBlock>>> {
    let c = twirl(alg, &random_square(seed, r, true));
    let z = project_onto(alg, &c);
    let mut out = Vec::new();
    for (_, p) in eigen_clusters(&z)? {
        let rk = p.ncols();
        let ck = p.adjoint() * &c * &p;
        let copies = eigen_clusters(&ck)?;
        let n = copies[0].1.ncols();
        let m = copies.len();
        if copies.iter().any(|(_, e)| e.ncols() != n) || n * m != rk {
            return Ok(None);
        }
        // compressed algebra must be all of M_n ⊗ I_m
        let compressed: Vec<Mat<C64>> = alg.iter().map(|a| p.adjoint() * a * &p).collect();
        let stacked = Mat::from_fn(rk * rk, compressed.len(), |i, j| compressed[j][(i / rk, i % rk)]);
        let rank = linalg::orthonormal_span(stacked.as_ref(), 1e-9)?.ncols();
        if rank != n * n {
            return Ok(None);
        }
        let local = if m == 1 {
            linalg::identity(rk)
        } else {
            // carry the first copy into the others with a generic commutant element
            let k = p.adjoint() * twirl(alg, &random_square(seed ^ 0x9e37_79b9, r, false)) * &p;
            let first = &copies[0].1;
            let mut cols = Mat::zeros(rk, n * m);
            for (t, (_, et)) in copies.iter().enumerate() {
                let proj = et * et.adjoint();
                let moved = &proj * &k * first;
                let scale = moved.col(0).norm_l2();
                if scale < 1e-8 {
                    return Ok(None);
                }
                for mu in 0..n {
                    for i in 0..rk {
                        cols[(i, mu * m + t)] = moved[(i, mu)] / scale;
                    }
                }
            }
            cols
        };
        out.push(RawBlock {
            n,
            m,
            cols: &p * local,
        });
    }
    Ok(Some(out))
}

/// Effective Hamiltonian on the `n` factor of one block, from the generator
/// eigenvalues of the limit-set operators it contains.
fn block_hamiltonian(
    cols: &Mat<C64>,
    n: usize,
    m: usize,
    elements: &[(Operator, C64)],
) -> Result<Mat<C64>> {
    let coeff: Vec<(Mat<C64>, C64)> = elements
        .iter()
        .map(|(x, g)| {
            let c = cols.adjoint() * x.as_mat() * cols;
            (trace_out_second(c.as_ref(), n, m), *g)
        })
        .filter(|(c, _)| c.norm_l2() > 1e-10)
        .collect();
    if coeff.iter().all(|(_, g)| g.norm() == 0.0) {
        return Ok(Mat::zeros(n, n));
    }
    // group by eigenvalue and take an orthonormal span of each group
    let mut groups: Vec<(C64, Vec<Mat<C64>>)> = Vec::new();
    for (c, g) in coeff {
        match groups.iter_mut().find(|(h, _)| (h - g).norm() <= 1e-9 * g.norm().max(1.0)) {
            Some((_, v)) => v.push(c),
            None => groups.push((g, vec![c])),
        }
    }
    let n2 = n * n;
    let mut q_cols: Vec<Vec<C64>> = Vec::new();
    let mut eig: Vec<C64> = Vec::new();
    for (g, mats) in &groups {
        let stacked = Mat::from_fn(n2, mats.len(), |i, j| mats[j][(i / n, i % n)]);
        let span = linalg::orthonormal_span(stacked.as_ref(), 1e-9)?;
        for k in 0..span.ncols() {
            q_cols.push((0..n2).map(|i| span[(i, k)]).collect());
            eig.push(*g);
        }
    }
    if q_cols.len() != n2 {
        return Err(Error::BlockStructure(format!(
            "limit set spans {} of the {} operators on an n = {n} block",
            q_cols.len(),
            n2
        )));
    }
    let q = Mat::from_fn(n2, n2, |i, j| q_cols[j][i]);
    let qinv = linalg::inverse(q.as_ref());
    let mut qd = q.clone();
    for (j, g) in eig.iter().enumerate() {
        for i in 0..n2 {
            qd[(i, j)] *= g;
        }
    }
    let gmat = &qd * &qinv;
    // G(Y) = -i[h, Y] gives h_ia = i G(E_a0)_i0 with the gauge h_00 = 0
    let h = Mat::from_fn(n, n, |i, a| I * gmat[(i * n, a * n)]);
    Ok(Mat::from_fn(n, n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)].conj())))
}

fn largest_entry_phase(col: faer::ColRef<'_, C64>) -> C64 {
    let mut best = ZERO;
    let mut mag = -1.0;
    for i in 0..col.nrows() {
        let v = col[i];
        if v.norm() > mag * (1.0 + 1e-9) {
            mag = v.norm();
            best = v;
        }
    }
    if mag <= 0.0 {
        ONE
    } else {
        best.conj() / mag
    }
}

/// Fixes the freedom `U -> U (V_n ⊗ V_m)` deterministically.
fn fix_gauge(
    v: Mat<C64>,
    n: usize,
    m: usize,
    h: &Mat<C64>,
    rho: &Operator,
) -> Result<(Mat<C64>, Mat<C64>)> {
    let nn = v.nrows();
    let w = weights(nn);
    let dg = Mat::from_fn(nn, nn, |i, j| if i == j { C64::new(w[i], 0.0) } else { ZERO });
    let d = v.adjoint() * &dg * &v;
    let dn = trace_out_second(d.as_ref(), n, m);
    let dm = trace_out_first(d.as_ref(), n, m);

    // n factor: energy eigenbasis, degeneracies resolved by the weight operator
    let mut vn_cols: Vec<Vec<C64>> = Vec::new();
    for (_, s) in eigen_clusters(h)? {
        let sub = s.adjoint() * &dn * &s;
        let (_, vs) = Operator::from_mat(sub).hermitian_part().hermitian_eigen()?;
        let rotated = &s * vs;
        for k in 0..rotated.ncols() {
            vn_cols.push((0..n).map(|i| rotated[(i, k)]).collect());
        }
    }
    let vn = Mat::from_fn(n, n, |i, j| vn_cols[j][i]);
    let (_, vm) = Operator::from_mat(dm).hermitian_part().hermitian_eigen()?;
    let mut u = &v * crate::operator::kron_mat(vn.as_ref(), vm.as_ref());

    // factor copies by descending population of T
    let t = trace_out_first((u.adjoint() * rho.as_mat() * &u).as_ref(), n, m);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| t[(b, b)].re.total_cmp(&t[(a, a)].re));
    let perm = u.clone();
    for mu in 0..n {
        for (newt, &oldt) in order.iter().enumerate() {
            for i in 0..nn {
                u[(i, mu * m + newt)] = perm[(i, mu * m + oldt)];
            }
        }
    }

    // phases: column (mu, 0) then column (0, t) get a real positive leading entry
    for mu in 0..n {
        let ph = largest_entry_phase(u.col(mu * m));
        for t in 0..m {
            for i in 0..nn {
                u[(i, mu * m + t)] *= ph;
            }
        }
    }
    for t in 1..m {
        let ph = largest_entry_phase(u.col(t));
        for mu in 0..n {
            for i in 0..nn {
                u[(i, mu * m + t)] *= ph;
            }
        }
    }
    let t = trace_out_first((u.adjoint() * rho.as_mat() * &u).as_ref(), n, m);
    Ok((u, t))
}

/// Discovers the block structure of the limit set of `dec`.
pub fn block_structure(dec: &AsymptoticDecomposition, seed: u64) -> Result<BlockStructure> {
    let nn = dec.hilbert_dim();
    if nn == 0 {
        return Err(Error::BlockStructure("empty decomposition".into()));
    }
    let mixed = Operator::identity(nn).scale(C64::new(1.0 / nn as f64, 0.0));
    let rho = dec.project_operator(&mixed)?.hermitian_part();
    let (vals, vecs) = rho.hermitian_eigen()?;
    let top = vals.last().copied().unwrap_or(0.0);
    let support: Vec<usize> = (0..nn).filter(|&k| vals[k] > SUPPORT_REL * top).collect();
    let r = support.len();
    let w = Mat::from_fn(nn, r, |i, j| vecs[(i, support[j])]);
    let inv_sqrt: Vec<f64> = support.iter().map(|&k| 1.0 / vals[k].sqrt()).collect();

    let mut elements: Vec<(Operator, C64)> = dec.steady.iter().map(|m| (m.clone(), ZERO)).collect();
    elements.extend(
        dec.rotating
            .iter()
            .map(|t| (t.o.clone(), C64::new(0.0, t.frequency))),
    );
    let gens: Vec<Mat<C64>> = elements
        .iter()
        .map(|(x, _)| {
            let a = w.adjoint() * x.as_mat() * &w;
            Mat::from_fn(r, r, |i, j| a[(i, j)] * inv_sqrt[i] * inv_sqrt[j])
        })
        .collect();
    let d = dec.dim();
    let alg = algebra_closure(&gens, d * d)?;

    let mut raw = None;
    for attempt in 0..=MAX_RETRIES {
        if let Some(b) = split_blocks(&alg, r, seed.wrapping_add(attempt))? {
            raw = Some(b);
            break;
        }
    }
    let raw = raw.ok_or_else(|| {
        Error::BlockStructure(format!(
            "probe eigenvalues stayed degenerate after {} seeds",
            MAX_RETRIES + 1
        ))
    })?;

    let mut blocks = Vec::with_capacity(raw.len());
    for b in raw {
        let cols = &w * &b.cols;
        let h = block_hamiltonian(&cols, b.n, b.m, &elements)?;
        let (basis, t) = fix_gauge(cols, b.n, b.m, &h, &rho)?;
        let tr = (0..b.m).map(|k| t[(k, k)]).sum::<C64>();
        let t = Operator::from_mat(t).scale(ONE / tr).hermitian_part();
        let factor_state = DensityMatrix::new(t)
            .map_err(|e| Error::BlockStructure(format!("factor state: {e}")))?;
        blocks.push(Block {
            n: b.n,
            m: b.m,
            factor_state,
            basis,
            energies: vec![0.0; b.n],
        });
    }
    blocks.sort_by(|a, b| {
        b.n.cmp(&a.n)
            .then(b.m.cmp(&a.m))
            .then(a.first_index().cmp(&b.first_index()))
    });
    let mut structure = BlockStructure {
        blocks,
        support_dim: r,
    };

    for (x, _) in &elements {
        let resid = (x - &structure.reconstruct(x)).norm_max();
        if resid > RECONSTRUCTION_TOL * x.norm_max().max(1.0) {
            return Err(Error::BlockStructure(format!(
                "reconstruction residual {resid:.3e} exceeds {RECONSTRUCTION_TOL:e}"
            )));
        }
    }

    let energies = extract_rotation_hamiltonian(&dec.rotating, &structure)?;
    for (b, e) in structure.blocks.iter_mut().zip(energies) {
        b.energies = e;
    }
    Ok(structure)
}

/// Energies `E_mu` per block with `lambda = E_nu - E_mu` for every rotating
/// coherence `|mu><nu|`, gauge `min E = 0`.
pub fn extract_rotation_hamiltonian(
    rotating: &[RotatingTriple],
    blocks: &BlockStructure,
) -> Result<Vec<Vec<f64>>> {
    let mut equations: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); blocks.blocks.len()];
    for triple in rotating {
        let mut best: Option<(usize, Mat<C64>, f64)> = None;
        for (k, b) in blocks.blocks.iter().enumerate() {
            let c = b.coefficients(&triple.o);
            let norm = c.norm_l2();
            if best.as_ref().is_none_or(|(_, _, n)| norm > *n) {
                best = Some((k, c, norm));
            }
        }
        let Some((k, c, _)) = best else { continue };
        let n = c.nrows();
        let (mut mu, mut nu, mut mag) = (0, 0, -1.0);
        for i in 0..n {
            for j in 0..n {
                if c[(i, j)].norm() > mag {
                    (mu, nu, mag) = (i, j, c[(i, j)].norm());
                }
            }
        }
        equations[k].push((mu, nu, triple.frequency));
    }
    blocks
        .blocks
        .iter()
        .zip(&equations)
        .map(|(b, eqs)| solve_energy_differences(b.n, eqs))
        .collect()
}

/// Least-squares solution of `E_nu - E_mu = lambda` for equations
/// `(mu, nu, lambda)`, shifted so that the smallest energy is zero.
pub fn solve_energy_differences(n: usize, equations: &[(usize, usize, f64)]) -> Result<Vec<f64>> {
    if equations.is_empty() {
        return Ok(vec![0.0; n]);
    }
    let rows: Vec<Vec<f64>> = equations
        .iter()
        .map(|&(mu, nu, _)| {
            let mut row = vec![0.0; n];
            row[nu] += 1.0;
            row[mu] -= 1.0;
            row
        })
        .collect();
    let rhs: Vec<f64> = equations.iter().map(|e| e.2).collect();
    let mut e = linalg::lstsq_real(&rows, &rhs)?;
    let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
    for x in e.iter_mut() {
        *x -= min;
    }
    let residual = equations
        .iter()
        .map(|&(mu, nu, l)| (e[nu] - e[mu] - l).abs())
        .fold(0.0, f64::max);
    if residual > ENERGY_TOL {
        return Err(Error::InconsistentDifferences { residual });
    }
    Ok(e)
}
