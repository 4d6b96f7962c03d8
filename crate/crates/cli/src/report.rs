//! The analysis report and the pipeline that fills it.

use serde::Serialize;
use sha2::{Digest, Sha256};

use lindblad_core::asymptotics::decompose;
use lindblad_core::liouvillian::{eigenvalues, Liouvillian, Tolerances};
use lindblad_core::structure::{block_structure, conserved_residual, BlockStructure, RECONSTRUCTION_TOL};
use lindblad_core::{hs_inner, AsymptoticDecomposition, DensityMatrix, Model, Operator, C64};

use crate::CliError;

pub const STEADY_TOL: f64 = 1e-8;
pub const CONSERVED_TOL: f64 = 1e-8;
pub const BIORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Serialize)]
pub struct ModelInfo {
    pub name: String,
    pub source: String,
    /// SHA-256 of the Hilbert dimensions and the bit patterns of `H` and every `F`.
    pub hash: String,
    pub hilbert_dim: usize,
    pub factors: Vec<usize>,
}

#[derive(Serialize)]
pub struct BlockRow {
    pub index: usize,
    pub n: usize,
    pub m: usize,
    pub energies: Vec<f64>,
    /// Row-major `[re, im]` pairs of the `m x m` factor state.
    pub factor_state: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
pub struct Coefficient {
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Serialize)]
pub struct Coefficients {
    pub state: String,
    /// `Tr{J_mu^† rho_in}` in the order of the steady basis.
    pub table: Vec<Coefficient>,
}

#[derive(Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct Report {
    pub model: ModelInfo,
    pub zero_tolerance: f64,
    pub steady_dim: usize,
    /// Absent when no eigenvalue decays.
    pub dissipation_gap: Option<f64>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub rotating_frequencies: Vec<f64>,
    pub support_dim: usize,
    pub blocks: Vec<BlockRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    pub residuals: Vec<Residual>,
}

impl Report {
    pub fn failed_residuals(&self) -> Vec<&Residual> {
        self.residuals.iter().filter(|r| !r.pass).collect()
    }
}

pub fn model_hash(model: &Model) -> String {
    let mut h = Sha256::new();
    for d in model.space().dims() {
        h.update((d as u64).to_le_bytes());
    }
    let mut feed = |op: &Operator| {
        for c in op.entries_row_major() {
            h.update(c.re.to_bits().to_le_bytes());
            h.update(c.im.to_bits().to_le_bytes());
        }
    };
    feed(model.hamiltonian());
    for f in model.jumps() {
        feed(f);
    }
    format!("{:x}", h.finalize())
}

pub struct Options {
    pub zero_scale: f64,
    pub margin: usize,
    pub seed: u64,
}

/// Everything downstream of the generator, computed once.
pub struct Analysis {
    pub liouvillian: Liouvillian,
    pub eigenvalues: Vec<C64>,
    pub decomposition: AsymptoticDecomposition,
    pub structure: BlockStructure,
    pub zero_tolerance: f64,
}

pub fn analyze(model: Model, opts: &Options) -> Result<Analysis, CliError> {
    let l = Liouvillian::new(model);
    let tol = Tolerances {
        zero_scale: opts.zero_scale,
        ..Tolerances::default()
    };
    let zero = tol.zero(&l);
    let vals = eigenvalues(&l, zero).map_err(CliError::from_core)?;
    let dec = decompose(&l, &tol).map_err(CliError::from_core)?;
    let structure = block_structure(&dec, opts.seed).map_err(CliError::from_core)?;
    Ok(Analysis {
        liouvillian: l,
        eigenvalues: vals,
        decomposition: dec,
        structure,
        zero_tolerance: zero,
    })
}

fn pairs(op: &Operator) -> Vec<Vec<[f64; 2]>> {
    (0..op.dim())
        .map(|i| (0..op.dim()).map(|j| [op.get(i, j).re, op.get(i, j).im]).collect())
        .collect()
}

fn residual(name: &str, value: f64, tolerance: f64) -> Residual {
    Residual {
        name: name.into(),
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

fn residuals(a: &Analysis, margin: usize) -> Vec<Residual> {
    let l = &a.liouvillian;
    let dec = &a.decomposition;
    let scale = l.matrix().norm_max().max(1.0);
    let steady = dec
        .steady
        .iter()
        .map(|m| l.model().lindblad_rhs(m).norm_max() / m.norm_max().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let conserved = dec
        .conserved
        .iter()
        .map(|j| conserved_residual(l.model(), j, margin) / j.norm_max().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let mut bi: f64 = 0.0;
    for (p, j) in dec.conserved.iter().enumerate() {
        for (q, m) in dec.steady.iter().enumerate() {
            let want = if p == q { 1.0 } else { 0.0 };
            let v = hs_inner(j, m).map(|v| (v - C64::new(want, 0.0)).norm()).unwrap_or(f64::INFINITY);
            bi = bi.max(v);
        }
    }
    let recon = dec
        .steady
        .iter()
        .map(|m| (m - &a.structure.reconstruct(m)).norm_max())
        .fold(0.0, f64::max);
    vec![
        residual("steady_generator", steady, STEADY_TOL * scale),
        residual("conserved_adjoint", conserved, CONSERVED_TOL * scale),
        residual("biorthogonality", bi, BIORTHOGONALITY_TOL),
        residual("block_reconstruction", recon, RECONSTRUCTION_TOL),
    ]
}

pub fn coefficients(dec: &AsymptoticDecomposition, spec: &str, rho: &DensityMatrix) -> Result<Coefficients, CliError> {
    let table = dec
        .coefficients(rho.as_operator())
        .map_err(CliError::from_core)?
        .into_iter()
        .enumerate()
        .map(|(index, c)| Coefficient { index, re: c.re, im: c.im })
        .collect();
    Ok(Coefficients {
        state: spec.to_string(),
        table,
    })
}

pub fn build(a: &Analysis, source: &str, margin: usize, coeffs: Option<Coefficients>) -> Report {
    let model = a.liouvillian.model();
    let blocks = a
        .structure
        .blocks
        .iter()
        .enumerate()
        .map(|(index, b)| BlockRow {
            index,
            n: b.n,
            m: b.m,
            energies: b.energies.clone(),
            factor_state: pairs(b.factor_state.as_operator()),
        })
        .collect();
    Report {
        model: ModelInfo {
            name: model.name().to_string(),
            source: source.to_string(),
            hash: model_hash(model),
            hilbert_dim: model.dim(),
            factors: model.space().dims(),
        },
        zero_tolerance: a.zero_tolerance,
        steady_dim: a.decomposition.dim(),
        dissipation_gap: a.decomposition.gap.filter(|g| g.is_finite()),
        eigenvalues: a.eigenvalues.iter().map(|v| [v.re, v.im]).collect(),
        rotating_frequencies: a.decomposition.rotating.iter().map(|r| r.frequency).collect(),
        support_dim: a.structure.support_dim,
        blocks,
        coefficients: coeffs,
        residuals: residuals(a, margin),
    }
}
