mod common;

use std::collections::BTreeMap;

use common::invariants::{self, instance, FAMILIES};
use lindblad_core::liouvillian::Liouvillian;
use lindblad_core::models::{coherent_diagonal, coherent_steady};
use lindblad_core::modelspec::{evaluate, parse_str, pretty, AtomOp, Expr, ExprKind};
use lindblad_core::random::{random_density, random_matrix, rng};
use lindblad_core::{kron, Factor, HilbertSpace, Operator, C64};
use proptest::prelude::*;

fn run_family(family: usize, a: f64, b: f64, seed: u64) -> Result<(), String> {
    let model = instance(family, a, b);
    let n = model.dim();
    let l = Liouvillian::new(model);
    let mut g = rng(seed);
    let x = random_matrix(&mut g, n);
    let rho = random_density(&mut g, n).into_operator();
    let sigma = random_density(&mut g, n).into_operator();
    invariants::spectral_nonpositivity(&l)?;
    invariants::conjugate_pairing(&l)?;
    invariants::trace_annihilation(&l, &x)?;
    invariants::hermiticity_preservation(&l, &x)?;
    invariants::nullspace_dimensions(&l)?;
    invariants::projector_idempotence(&l, &x)?;
    invariants::duality_pairing(&l, &x, &rho)?;
    invariants::contraction(&l, &rho, &sigma, 0.25, 6)
}

macro_rules! family_suite {
    ($name:ident, $idx:expr) => {
        proptest! {
            #![proptest_config(ProptestConfig::with_cases(50))]
            #[test]
            fn $name(a in 0.0f64..1.0, b in 0.0f64..1.0, seed in any::<u64>()) {
                let r = run_family($idx, a, b, seed);
                prop_assert!(r.is_ok(), "{}: {}", FAMILIES[$idx], r.unwrap_err());
            }
        }
    };
}

family_suite!(dephasing_invariants, 0);
family_suite!(two_qubit_invariants, 1);
family_suite!(driven_two_qubit_invariants, 2);
family_suite!(two_photon_invariants, 3);
family_suite!(three_photon_invariants, 4);

// expression trees

fn space() -> HilbertSpace {
    HilbertSpace::new(vec![Factor::qubit(), Factor::fock(3)]).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Local matrices written out by hand, independent of the library builders.
fn local(op: AtomOp) -> Operator {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let s2 = c(2f64.sqrt(), 0.0);
    match op {
        AtomOp::X => Operator::from_rows(&[vec![z, one], vec![one, z]]),
        AtomOp::Y => Operator::from_rows(&[vec![z, c(0.0, -1.0)], vec![c(0.0, 1.0), z]]),
        AtomOp::Z => Operator::from_rows(&[vec![one, z], vec![z, -one]]),
        AtomOp::SigmaPlus => Operator::from_rows(&[vec![z, one], vec![z, z]]),
        AtomOp::SigmaMinus => Operator::from_rows(&[vec![z, z], vec![one, z]]),
        AtomOp::Annihilate => Operator::from_rows(&[vec![z, one, z], vec![z, z, s2], vec![z, z, z]]),
        AtomOp::Create => Operator::from_rows(&[vec![z, z, z], vec![one, z, z], vec![z, s2, z]]),
        AtomOp::Number => Operator::diagonal(&[z, one, c(2.0, 0.0)]),
        AtomOp::Identity => Operator::identity(6),
    }
}

fn oracle(e: &Expr, g: f64) -> Operator {
    let id = Operator::identity(6);
    match &e.kind {
        ExprKind::Sum(a, b) => &oracle(a, g) + &oracle(b, g),
        ExprKind::Difference(a, b) => &oracle(a, g) - &oracle(b, g),
        ExprKind::Product(a, b) => &oracle(a, g) * &oracle(b, g),
        ExprKind::Power(a, k) => {
            let base = oracle(a, g);
            (0..*k).fold(id, |acc, _| &acc * &base)
        }
        ExprKind::Negate(a) => -oracle(a, g),
        ExprKind::Adjoint(a) => oracle(a, g).adjoint(),
        ExprKind::Atom(AtomOp::Identity, _) => id,
        ExprKind::Atom(op, 1) => kron(&local(*op), &Operator::identity(3)),
        ExprKind::Atom(op, _) => kron(&Operator::identity(2), &local(*op)),
        ExprKind::Scalar(s) => id.scale(*s),
        ExprKind::Param(_) => id.scale(c(g, 0.0)),
    }
}

fn leaf() -> impl Strategy<Value = Expr> {
    let atoms = prop_oneof![
        Just((AtomOp::X, 1)),
        Just((AtomOp::Y, 1)),
        Just((AtomOp::Z, 1)),
        Just((AtomOp::SigmaPlus, 1)),
        Just((AtomOp::SigmaMinus, 1)),
        Just((AtomOp::Annihilate, 2)),
        Just((AtomOp::Create, 2)),
        Just((AtomOp::Number, 2)),
        Just((AtomOp::Identity, 0)),
    ];
    prop_oneof![
        4 => atoms.prop_map(|(op, site)| Expr::new(ExprKind::Atom(op, site))),
        1 => (0.0f64..4.0).prop_map(|v| Expr::new(ExprKind::Scalar(c(v, 0.0)))),
        1 => (0.0f64..2.0).prop_map(|v| Expr::new(ExprKind::Scalar(c(0.0, v)))),
        1 => Just(Expr::new(ExprKind::Param("g".into()))),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::new(ExprKind::Sum(b(x), b(y)))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::new(ExprKind::Difference(b(x), b(y)))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::new(ExprKind::Product(b(x), b(y)))),
            (inner.clone(), 0u32..4).prop_map(move |(x, k)| Expr::new(ExprKind::Power(b(x), k))),
            inner.clone().prop_map(move |x| Expr::new(ExprKind::Negate(b(x)))),
            inner.prop_map(move |x| Expr::new(ExprKind::Adjoint(b(x)))),
        ]
    })
}

fn close(a: &Operator, b: &Operator) -> bool {
    (a - b).norm_max() <= 1e-10 * a.norm_max().max(b.norm_max()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pretty_print_round_trips(e in tree()) {
        let text = pretty(&e);
        let back = parse_str(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn evaluation_matches_oracle(e in tree(), g in -2.0f64..2.0) {
        let params = BTreeMap::from([("g".to_string(), g)]);
        let got = evaluate(&e, &space(), &params).unwrap();
        let want = oracle(&e, g);
        prop_assert!(close(&got, &want), "{}", pretty(&e));
    }

    #[test]
    fn evaluation_is_linear(x in tree(), y in tree(), g in -2.0f64..2.0) {
        let params = BTreeMap::from([("g".to_string(), g)]);
        let s = space();
        let ex = evaluate(&x, &s, &params).unwrap();
        let ey = evaluate(&y, &s, &params).unwrap();
        let sum = Expr::new(ExprKind::Sum(Box::new(x.clone()), Box::new(y.clone())));
        let diff = Expr::new(ExprKind::Difference(Box::new(x), Box::new(y)));
        prop_assert!(close(&evaluate(&sum, &s, &params).unwrap(), &(&ex + &ey)));
        prop_assert!(close(&evaluate(&diff, &s, &params).unwrap(), &(&ex - &ey)));
    }

    #[test]
    fn atoms_on_distinct_sites_commute(p in 0usize..5, q in 0usize..3) {
        let qubit = [AtomOp::X, AtomOp::Y, AtomOp::Z, AtomOp::SigmaPlus, AtomOp::SigmaMinus];
        let fock = [AtomOp::Annihilate, AtomOp::Create, AtomOp::Number];
        let s = space();
        let none = BTreeMap::new();
        let a = evaluate(&Expr::new(ExprKind::Atom(qubit[p], 1)), &s, &none).unwrap();
        let b = evaluate(&Expr::new(ExprKind::Atom(fock[q], 2)), &s, &none).unwrap();
        prop_assert!((&(&a * &b) - &(&b * &a)).norm_max() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn coherent_limit_is_a_state(d in 1usize..5, r in 0.0f64..3.0, theta in 0.0f64..std::f64::consts::TAU) {
        let rho = coherent_steady(d, C64::from_polar(r, theta)).unwrap();
        prop_assert!(rho.hermitian_deviation() < 1e-12);
        prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-10);
        let min = rho.hermitian_eigenvalues().unwrap()[0];
        prop_assert!(min > -1e-10, "eigenvalue {}", min);
        let diag = coherent_diagonal(d, C64::from_polar(r, theta));
        for (mu, v) in diag.iter().enumerate() {
            prop_assert!((rho.get(mu, mu).re - v).abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_limit_encodes_phase(d in 2usize..5, r in 0.2f64..3.0, theta in 0.0f64..std::f64::consts::TAU) {
        let base = coherent_steady(d, c(r, 0.0)).unwrap();
        let rot = coherent_steady(d, C64::from_polar(r, theta)).unwrap();
        for mu in 0..d {
            for nu in 0..d {
                let phase = C64::from_polar(1.0, -theta * (nu as f64 - mu as f64));
                prop_assert!((rot.get(mu, nu) - base.get(mu, nu) * phase).norm() < 1e-12);
            }
        }
    }
}
