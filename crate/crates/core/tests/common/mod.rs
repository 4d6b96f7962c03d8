#![allow(dead_code)]

pub mod invariants;

use faer::Mat;
use lindblad_core::linalg::{orthonormal_span, subspace_sin};
use lindblad_core::{Operator, C64};

/// Columns are the row-major vectorizations of `ops`.
pub fn stack(ops: &[Operator]) -> Mat<C64> {
    let n = ops.first().map(|o| o.dim()).unwrap_or(0);
    Mat::from_fn(n * n, ops.len(), |i, j| ops[j].get(i / n, i % n))
}

/// Largest principal-angle sine between the spans of two operator lists.
pub fn span_distance(a: &[Operator], b: &[Operator]) -> f64 {
    let qa = orthonormal_span(stack(a).as_ref(), 1e-10).unwrap();
    let qb = orthonormal_span(stack(b).as_ref(), 1e-10).unwrap();
    subspace_sin(qa.as_ref(), qb.as_ref()).unwrap()
}

/// Zeroes every row and column at or beyond `dim - margin`.
pub fn interior(op: &Operator, margin: usize) -> Operator {
    let n = op.dim();
    let cut = n.saturating_sub(margin);
    Operator::from_fn(n, |i, j| if i < cut && j < cut { op.get(i, j) } else { C64::new(0.0, 0.0) })
}

pub fn max_gram_error(j: &[Operator], m: &[Operator]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, ja) in j.iter().enumerate() {
        for (b, mb) in m.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            let v = lindblad_core::hs_inner(ja, mb).unwrap();
            worst = worst.max((v - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// Malformed expressions and the column each diagnostic must point at.
/// Evaluated on a qubit (site 1) times a 4-level Fock factor (site 2).
pub const GRAMMAR_NEGATIVE_CASES: [(&str, usize); 30] = [
    ("Z1 $ X1", 4),
    ("#", 1),
    ("Z1 + 1.2.3", 6),
    ("Z1*(+", 5),
    ("(Z1 + a2", 1),
    ("Z1)", 3),
    ("", 1),
    ("Z1 Z1", 4),
    ("Z1 +", 5),
    ("* Z1", 1),
    ("Z1 ^ 2.5", 6),
    ("Z1 ^ -1", 6),
    ("Z1^", 4),
    ("dag Z1", 5),
    ("dag(Z1", 4),
    ("dag()", 5),
    ("()", 2),
    ("Q1", 1),
    ("X3", 1),
    ("Z1 * a1", 6),
    ("X2", 1),
    ("Z0", 1),
    ("2*gamma*Z1", 3),
    ("Z1 + + Z1", 6),
    ("Z1 * * Z1", 6),
    ("((Z1)", 1),
    ("Z1 @ Z1", 4),
    ("1e", 2),
    ("n2^2^2", 5),
    ("ad2 - n", 7),
];

pub fn mixed_space() -> lindblad_core::HilbertSpace {
    use lindblad_core::{Factor, HilbertSpace};
    HilbertSpace::new(vec![Factor::qubit(), Factor::fock(4)]).unwrap()
}
