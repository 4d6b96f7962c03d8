//! Partition of Liouville space by conserved orthogonal projectors.

use faer::Mat;

use crate::error::{Error, Result};
use crate::liouvillian::{generator_block, BlockOps, Liouvillian, Model};
use crate::operator::{commutator, Operator, SuperOperator, C64};

const PROJECTOR_TOL: f64 = 1e-10;

/// Sectors `(mu, nu)` of operators `Pi_mu X Pi_nu`, each evolving
/// independently under the generator.
#[derive(Clone, Debug)]
pub struct SectorMap {
    projectors: Vec<Operator>,
    isometries: Vec<Mat<C64>>,
    cross_norm: f64,
}

impl SectorMap {
    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    /// Orthonormal columns spanning the range of each projector.
    pub fn isometries(&self) -> &[Mat<C64>] {
        &self.isometries
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// All sector labels in row-major order.
    pub fn sectors(&self) -> Vec<(usize, usize)> {
        let d = self.len();
        (0..d).flat_map(|mu| (0..d).map(move |nu| (mu, nu))).collect()
    }

    pub fn sector_dim(&self, mu: usize, nu: usize) -> usize {
        self.isometries[mu].ncols() * self.isometries[nu].ncols()
    }

    /// Largest generator entry coupling different sectors.
    pub fn cross_norm(&self) -> f64 {
        self.cross_norm
    }

    /// Generator restricted to sector `(mu, nu)`, acting on the row-stacked
    /// compressed operator `V_mu^† X V_nu`.
    pub fn sub_liouvillian(&self, model: &Model, mu: usize, nu: usize) -> SuperOperator {
        let a = BlockOps::compress(model, self.isometries[mu].as_ref());
        let b = BlockOps::compress(model, self.isometries[nu].as_ref());
        SuperOperator::from_mat(generator_block(&a, &b))
    }

    pub fn sub_liouvillians(&self, model: &Model) -> Vec<((usize, usize), SuperOperator)> {
        self.sectors()
            .into_iter()
            .map(|(mu, nu)| ((mu, nu), self.sub_liouvillian(model, mu, nu)))
            .collect()
    }

    /// Index of the sector containing computational basis state `i`, if the
    /// projectors are diagonal.
    fn diagonal_labels(&self) -> Option<Vec<usize>> {
        let n = self.projectors.first()?.dim();
        let mut labels = vec![usize::MAX; n];
        for (mu, p) in self.projectors.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let v = p.get(i, j);
                    if i != j && v.norm() > PROJECTOR_TOL {
                        return None;
                    }
                }
                if p.get(i, i).re > 0.5 {
                    labels[i] = mu;
                }
            }
        }
        Some(labels)
    }
}

fn isometry(p: &Operator) -> Result<Mat<C64>> {
    let n = p.dim();
    let offdiag = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| p.get(i, j).norm())
        .fold(0.0, f64::max);
    if offdiag < PROJECTOR_TOL {
        let cols: Vec<usize> = (0..n).filter(|&i| p.get(i, i).re > 0.5).collect();
        return Ok(Mat::from_fn(n, cols.len(), |i, k| {
            if i == cols[k] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }));
    }
    let (vals, vecs) = p.hermitian_eigen()?;
    let cols: Vec<usize> = (0..n).filter(|&k| vals[k] > 0.5).collect();
    Ok(Mat::from_fn(n, cols.len(), |i, k| vecs[(i, cols[k])]))
}

/// Algebraic preconditions shared by both partition routes.
fn projector_violations(projectors: &[Operator], n: usize) -> Vec<String> {
    let mut bad = Vec::new();
    if projectors.is_empty() {
        bad.push("no projectors given".into());
        return bad;
    }
    let mut sum = Operator::zeros(n);
    for (k, p) in projectors.iter().enumerate() {
        if p.dim() != n {
            bad.push(format!("projector {k} has dimension {}, expected {n}", p.dim()));
            continue;
        }
        let herm = p.hermitian_deviation();
        if herm > PROJECTOR_TOL {
            bad.push(format!("projector {k} is not Hermitian (deviation {herm:.3e})"));
        }
        let idem = (&(p * p) - p).norm_max();
        if idem > PROJECTOR_TOL {
            bad.push(format!("projector {k} is not idempotent (||P^2 - P|| = {idem:.3e})"));
        }
        for (l, q) in projectors.iter().enumerate().skip(k + 1) {
            if q.dim() == n {
                let overlap = (p * q).norm_max();
                if overlap > PROJECTOR_TOL {
                    bad.push(format!("projectors {k} and {l} overlap (||P Q|| = {overlap:.3e})"));
                }
            }
        }
        sum += p;
    }
    let completeness = (&sum - &Operator::identity(n)).norm_max();
    if completeness > PROJECTOR_TOL {
        bad.push(format!("projectors do not sum to the identity (deviation {completeness:.3e})"));
    }
    bad
}

/// Partition verified against the full generator matrix.
pub fn parity_partition(projectors: &[Operator], l: &Liouvillian) -> Result<SectorMap> {
    let n = l.dim();
    let mut bad = projector_violations(projectors, n);
    let scale = l.matrix().norm_max().max(1.0);
    if bad.is_empty() {
        for (k, p) in projectors.iter().enumerate() {
            let r = l.model().adjoint_rhs(p).norm_max();
            if r > 1e-9 * scale {
                bad.push(format!("projector {k} is not conserved (||L^†(P)|| = {r:.3e})"));
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::ProjectorPrecondition(bad));
    }
    let isometries = projectors.iter().map(isometry).collect::<Result<Vec<_>>>()?;
    let mut map = SectorMap {
        projectors: projectors.to_vec(),
        isometries,
        cross_norm: 0.0,
    };
    map.cross_norm = cross_norm_full(&map, l)?;
    if map.cross_norm > 1e-9 * scale {
        return Err(Error::ProjectorPrecondition(vec![format!(
            "generator couples different sectors (max entry {:.3e})",
            map.cross_norm
        )]));
    }
    Ok(map)
}

fn cross_norm_full(map: &SectorMap, l: &Liouvillian) -> Result<f64> {
    let n = l.dim();
    let m = l.matrix().as_mat();
    if let Some(labels) = map.diagonal_labels() {
        let mut worst = 0.0f64;
        for r in 0..n * n {
            let sr = (labels[r / n], labels[r % n]);
            for c in 0..n * n {
                if sr != (labels[c / n], labels[c % n]) {
                    worst = worst.max(m[(r, c)].norm());
                }
            }
        }
        return Ok(worst);
    }
    // rotate into the sector basis V_mu ⊗ conj(V_nu)
    let d = map.len();
    let mut blocks: Vec<Mat<C64>> = Vec::new();
    for mu in 0..d {
        for nu in 0..d {
            blocks.push(crate::operator::kron_mat(
                map.isometries[mu].as_ref(),
                crate::operator::conj_mat(map.isometries[nu].as_ref()).as_ref(),
            ));
        }
    }
    let w = Mat::from_fn(n * n, n * n, |i, j| {
        let mut k = j;
        for b in &blocks {
            if k < b.ncols() {
                return b[(i, k)];
            }
            k -= b.ncols();
        }
        unreachable!()
    });
    let rotated = w.adjoint() * m * &w;
    let mut offsets = Vec::new();
    let mut acc = 0;
    for b in &blocks {
        offsets.push((acc, acc + b.ncols()));
        acc += b.ncols();
    }
    let owner = |i: usize| offsets.iter().position(|&(s, e)| i >= s && i < e).unwrap();
    let mut worst = 0.0f64;
    for r in 0..n * n {
        for c in 0..n * n {
            if owner(r) != owner(c) {
                worst = worst.max(rotated[(r, c)].norm());
            }
        }
    }
    Ok(worst)
}

/// Partition verified matrix-free: each projector must commute with the
/// Hamiltonian and every jump operator, which makes every generator term
/// sector-preserving.
pub fn parity_partition_model(projectors: &[Operator], model: &Model) -> Result<SectorMap> {
    let n = model.dim();
    let mut bad = projector_violations(projectors, n);
    if bad.is_empty() {
        let scale = std::iter::once(model.hamiltonian())
            .chain(model.jumps())
            .map(|o| o.norm_max())
            .fold(1.0, f64::max);
        for (k, p) in projectors.iter().enumerate() {
            let mut worst = commutator(p, model.hamiltonian()).norm_max();
            for f in model.jumps() {
                worst = worst.max(commutator(p, f).norm_max());
            }
            if worst > 1e-9 * scale {
                bad.push(format!(
                    "projector {k} does not commute with the model operators ({worst:.3e})"
                ));
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::ProjectorPrecondition(bad));
    }
    let isometries = projectors.iter().map(isometry).collect::<Result<Vec<_>>>()?;
    Ok(SectorMap {
        projectors: projectors.to_vec(),
        isometries,
        cross_norm: 0.0,
    })
}

/// Finest partition of the computational basis left invariant by the
/// Hamiltonian and all jump operators: the connected components of the graph
/// joining `i` and `j` whenever some operator has a nonzero `(i, j)` entry.
pub fn computational_partition(model: &Model) -> Vec<Operator> {
    let n = model.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    for op in std::iter::once(model.hamiltonian()).chain(model.jumps()) {
        for i in 0..n {
            for j in 0..n {
                if op.get(i, j).norm() > 1e-14 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut label = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        let k = match roots.iter().position(|&x| x == r) {
            Some(k) => k,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        label[i] = k;
    }
    (0..roots.len())
        .map(|k| {
            Operator::from_fn(n, |i, j| {
                if i == j && label[i] == k {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect()
}
