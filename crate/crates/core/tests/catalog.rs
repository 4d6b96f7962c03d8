mod common;

use common::{interior, max_gram_error, span_distance};
use lindblad_core::asymptotics::{asymptotic_project, decompose, infinite_time_state};
use lindblad_core::evolve::{horizon, propagate};
use lindblad_core::liouvillian::{Liouvillian, Tolerances};
use lindblad_core::models::{self, CatalogEntry};
use lindblad_core::structure::{
    block_structure, check_conserved_interior, check_strong_symmetry, DEFAULT_SEED,
};
use lindblad_core::{embed, pauli_z, DensityMatrix, HilbertSpace, Operator, C64};

fn entries() -> Vec<CatalogEntry> {
    vec![
        models::dephasing(),
        models::two_qubit(),
        models::driven_two_qubit(1.0),
        models::d_photon(2, 16).unwrap(),
        models::d_photon(3, 18).unwrap(),
    ]
}

#[test]
fn numeric_spans_match_analytic_spans() {
    for e in entries() {
        let l = Liouvillian::new(e.model.clone());
        let dec = decompose(&l, &Tolerances::default()).unwrap();
        assert_eq!(dec.dim(), e.analytic_m.len(), "{}", e.model.name());
        assert!(span_distance(&dec.steady, &e.analytic_m) < 1e-8, "{}", e.model.name());
        let margin = e.interior_margin;
        let num: Vec<Operator> = dec.conserved.iter().map(|j| interior(j, margin)).collect();
        let ana: Vec<Operator> = e.analytic_j.iter().map(|j| interior(j, margin)).collect();
        assert!(span_distance(&num, &ana) < 1e-8, "{}", e.model.name());
        assert!(max_gram_error(&dec.conserved, &dec.steady) < 1e-9);
    }
}

#[test]
fn analytic_quantities_are_conserved() {
    for e in entries() {
        for j in &e.analytic_j {
            assert!(check_conserved_interior(j, &e.model, 1e-9, e.interior_margin), "{}", e.model.name());
        }
        let l = Liouvillian::new(e.model.clone());
        for m in &e.analytic_m {
            assert!(l.apply(m).unwrap().norm_max() < 1e-12, "{}", e.model.name());
        }
    }
}

#[test]
fn projection_matches_long_time_propagation() {
    let mut g = lindblad_core::random::rng(17);
    for e in entries() {
        let l = Liouvillian::new(e.model.clone());
        let dec = decompose(&l, &Tolerances::default()).unwrap();
        let t = horizon(dec.gap.unwrap()).expect("catalog models decay");
        let rho = lindblad_core::random::random_density(&mut g, e.model.dim());
        let p = asymptotic_project(&dec, &rho).unwrap();
        let q = propagate(&l, &rho, t).unwrap();
        let r = (p.as_operator() - q.as_operator()).norm_max();
        assert!(r < 1e-6, "{}: {r:e}", e.model.name());
    }
}

#[test]
fn dephasing_keeps_z_component() {
    let e = models::dephasing();
    let l = Liouvillian::new(e.model.clone());
    let dec = decompose(&l, &Tolerances::default()).unwrap();
    let plus = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
    let out = asymptotic_project(&dec, &plus).unwrap();
    assert!((out.as_operator() - &Operator::identity(2).scale(C64::new(0.5, 0.0))).norm_max() < 1e-12);
    let zero = DensityMatrix::basis_state(2, 0);
    let out = asymptotic_project(&dec, &zero).unwrap();
    assert!((out.as_operator() - zero.as_operator()).norm_max() < 1e-12);
}

#[test]
fn two_qubit_structures() {
    let e = models::two_qubit();
    let l = Liouvillian::new(e.model.clone());
    let dec = decompose(&l, &Tolerances::default()).unwrap();
    let s = block_structure(&dec, DEFAULT_SEED).unwrap();
    assert_eq!(s.blocks.len(), 1);
    assert_eq!((s.blocks[0].n, s.blocks[0].m), (2, 1));

    let d = models::dephasing();
    let dec = decompose(&Liouvillian::new(d.model.clone()), &Tolerances::default()).unwrap();
    let s = block_structure(&dec, DEFAULT_SEED).unwrap();
    assert_eq!(s.blocks.len(), 2);
    assert!(s.blocks.iter().all(|b| b.n == 1 && b.m == 1));
    assert!(check_strong_symmetry(&pauli_z(), &d.model, 1e-12));
}

#[test]
fn driven_model_is_a_noiseless_subsystem() {
    for w in [0.3, 1.0, 3.0] {
        let e = models::driven_two_qubit(w);
        let dec = decompose(&Liouvillian::new(e.model.clone()), &Tolerances::default()).unwrap();
        let s = block_structure(&dec, DEFAULT_SEED).unwrap();
        assert_eq!(s.blocks.len(), 1);
        let b = &s.blocks[0];
        assert_eq!((b.n, b.m), (2, 2));
        let want = models::driven_factor_state(w);
        let got = b.factor_state.as_operator();
        assert!((got - &want).norm_max() < 1e-7, "w = {w}: {got:?}");
    }
}

#[test]
fn d_photon_is_one_full_block() {
    let e = models::d_photon(3, 18).unwrap();
    let dec = decompose(&Liouvillian::new(e.model.clone()), &Tolerances::default()).unwrap();
    let s = block_structure(&dec, DEFAULT_SEED).unwrap();
    assert_eq!(s.blocks.len(), 1);
    assert_eq!((s.blocks[0].n, s.blocks[0].m), (3, 1));
    assert_eq!(s.capacity(), 9);
}

#[test]
fn oscillating_coherences_from_detuning() {
    let space = HilbertSpace::qubits(2);
    let h = embed(0, &pauli_z(), &space).unwrap().scale(C64::new(0.35, 0.0));
    let model = lindblad_core::liouvillian::Model::new(space, h, vec![models::two_qubit_jump()]).unwrap();
    let l = Liouvillian::new(model);
    let dec = decompose(&l, &Tolerances::default()).unwrap();
    assert_eq!(dec.dim(), 2);
    assert_eq!(dec.rotating.len(), 2);
    let mut f: Vec<f64> = dec.rotating.iter().map(|r| r.frequency).collect();
    f.sort_by(f64::total_cmp);
    assert!((f[0] + 0.7).abs() < 1e-9 && (f[1] - 0.7).abs() < 1e-9);

    let s = block_structure(&dec, DEFAULT_SEED).unwrap();
    assert_eq!(s.blocks.len(), 1);
    assert_eq!((s.blocks[0].n, s.blocks[0].m), (2, 1));
    let en = &s.blocks[0].energies;
    assert!((en[0]).abs() < 1e-9 && (en[1] - 0.7).abs() < 1e-9, "{en:?}");

    let rho = lindblad_core::random::random_density(&mut lindblad_core::random::rng(2), 4);
    let gap = dec.gap.unwrap();
    for t in [30.0 / gap, 30.0 / gap + 1.0, 30.0 / gap + 2.5] {
        let p = infinite_time_state(&dec, &rho, t).unwrap();
        let q = propagate(&l, &rho, t).unwrap();
        assert!((p.as_operator() - q.as_operator()).norm_max() < 1e-6);
    }
}
