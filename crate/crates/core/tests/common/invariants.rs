//! Structural checks shared by the property tests and the acceptance runner.

use lindblad_core::asymptotics::decompose;
use lindblad_core::evolve::Propagator;
use lindblad_core::liouvillian::{eigenvalues, Liouvillian, Tolerances};
use lindblad_core::models;
use lindblad_core::operator::trace_distance;
use lindblad_core::{conserved_quantities, steady_basis, Model, Operator, C64};

pub const FAMILIES: [&str; 5] = ["dephasing", "two_qubit", "driven_two_qubit", "d_photon_2", "d_photon_3"];

fn rescale(model: &Model, rate: f64, h: Operator) -> Model {
    let s = C64::new(rate.sqrt(), 0.0);
    let jumps = model.jumps().iter().map(|f| f.scale(s)).collect();
    Model::new(model.space().clone(), h, jumps).unwrap().with_name(model.name())
}

/// Catalog model `family` with its rate and Hamiltonian perturbed by `a, b` in `[0, 1)`.
pub fn instance(family: usize, a: f64, b: f64) -> Model {
    let rate = 0.2 + 1.8 * a;
    match FAMILIES[family] {
        "dephasing" => {
            let m = models::dephasing().model;
            rescale(&m, rate, lindblad_core::pauli_z().scale(C64::new(2.0 * b - 1.0, 0.0)))
        }
        "two_qubit" => {
            let m = models::two_qubit().model;
            let z1 = lindblad_core::embed(0, &lindblad_core::pauli_z(), m.space()).unwrap();
            rescale(&m, rate, z1.scale(C64::new(b - 0.5, 0.0)))
        }
        "driven_two_qubit" => {
            let m = models::driven_two_qubit(0.1 + 2.9 * b).model;
            let h = m.hamiltonian().clone();
            rescale(&m, rate, h)
        }
        "d_photon_2" => {
            let m = models::d_photon(2, 10).unwrap().model;
            rescale(&m, rate, Operator::zeros(10))
        }
        "d_photon_3" => {
            let m = models::d_photon(3, 14).unwrap().model;
            rescale(&m, rate, Operator::zeros(14))
        }
        _ => unreachable!(),
    }
}

fn scale(l: &Liouvillian) -> f64 {
    l.matrix().norm_max().max(1.0)
}

pub fn spectral_nonpositivity(l: &Liouvillian) -> Result<(), String> {
    let tol = Tolerances::default().zero(l);
    let vals = eigenvalues(l, tol).map_err(|e| e.to_string())?;
    let worst = vals.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    if worst > tol {
        return Err(format!("eigenvalue with real part {worst:e}"));
    }
    Ok(())
}

pub fn conjugate_pairing(l: &Liouvillian) -> Result<(), String> {
    let tol = Tolerances::default().zero(l);
    let vals = eigenvalues(l, tol).map_err(|e| e.to_string())?;
    let mut used = vec![false; vals.len()];
    for v in &vals {
        let target = v.conj();
        let k = (0..vals.len())
            .filter(|&k| !used[k])
            .min_by(|&a, &b| (vals[a] - target).norm().total_cmp(&(vals[b] - target).norm()))
            .unwrap();
        let miss = (vals[k] - target).norm();
        if miss > 1e-7 * scale(l) {
            return Err(format!("{v} has no conjugate partner (closest off by {miss:e})"));
        }
        used[k] = true;
    }
    Ok(())
}

pub fn trace_annihilation(l: &Liouvillian, x: &Operator) -> Result<(), String> {
    let tr = l.apply(x).map_err(|e| e.to_string())?.trace().norm();
    if tr > 1e-12 * scale(l) * x.norm_fro() * x.dim() as f64 {
        return Err(format!("Tr L(X) = {tr:e}"));
    }
    Ok(())
}

pub fn hermiticity_preservation(l: &Liouvillian, x: &Operator) -> Result<(), String> {
    let a = l.apply(&x.adjoint()).map_err(|e| e.to_string())?;
    let b = l.apply(x).map_err(|e| e.to_string())?.adjoint();
    let r = (&a - &b).norm_max();
    if r > 1e-12 * scale(l) * x.norm_max().max(1.0) {
        return Err(format!("L(X^†) - L(X)^† = {r:e}"));
    }
    Ok(())
}

pub fn nullspace_dimensions(l: &Liouvillian) -> Result<(), String> {
    let rel = Tolerances::default().null_rel;
    let m = steady_basis(l, rel).map_err(|e| e.to_string())?;
    let j = conserved_quantities(l, rel).map_err(|e| e.to_string())?;
    if m.len() != j.len() {
        return Err(format!("dim ker L = {}, dim ker L^† = {}", m.len(), j.len()));
    }
    Ok(())
}

pub fn projector_idempotence(l: &Liouvillian, x: &Operator) -> Result<(), String> {
    let dec = decompose(l, &Tolerances::default()).map_err(|e| e.to_string())?;
    let p = dec.project_operator(x).map_err(|e| e.to_string())?;
    let pp = dec.project_operator(&p).map_err(|e| e.to_string())?;
    let r = (&pp - &p).norm_max();
    if r > 1e-9 * x.norm_max().max(1.0) {
        return Err(format!("P(P(X)) - P(X) = {r:e}"));
    }
    Ok(())
}

/// `Tr{X^† L(rho)} = Tr{L^†(X)^† rho}` with the adjoint taken from its own formula.
pub fn duality_pairing(l: &Liouvillian, x: &Operator, rho: &Operator) -> Result<(), String> {
    let lhs = hs(x, &l.apply(rho).map_err(|e| e.to_string())?);
    let rhs = hs(&l.model().adjoint_rhs(x), rho);
    let r = (lhs - rhs).norm();
    if r > 1e-11 * scale(l) * x.norm_fro() * rho.norm_fro() * x.dim() as f64 {
        return Err(format!("pairing mismatch {r:e}"));
    }
    Ok(())
}

fn hs(a: &Operator, b: &Operator) -> C64 {
    lindblad_core::hs_inner(a, b).unwrap()
}

/// Trace distance between two evolving states never grows.
pub fn contraction(l: &Liouvillian, rho: &Operator, sigma: &Operator, dt: f64, steps: usize) -> Result<(), String> {
    let p = Propagator::new(l, dt).map_err(|e| e.to_string())?;
    let (mut a, mut b) = (rho.clone(), sigma.clone());
    let mut prev = trace_distance(&a, &b).map_err(|e| e.to_string())?;
    for k in 0..steps {
        a = p.apply(&a).map_err(|e| e.to_string())?;
        b = p.apply(&b).map_err(|e| e.to_string())?;
        let d = trace_distance(&a, &b).map_err(|e| e.to_string())?;
        if d > prev + 1e-10 {
            return Err(format!("trace distance grew from {prev:e} to {d:e} at step {k}"));
        }
        prev = d;
    }
    Ok(())
}
