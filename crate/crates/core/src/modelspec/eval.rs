use std::collections::BTreeMap;

use super::parser::{parse_str, split_atom, AtomOp, Expr, ExprKind};
use super::SpecError;
use crate::operator::{
    annihilation, creation, embed, number, pauli_x, pauli_y, pauli_z, sigma_minus, sigma_plus,
    FactorKind, HilbertSpace, Operator, C64,
};

enum Value {
    Scalar(C64),
    Op(Operator),
}

impl Value {
    fn into_op(self, n: usize) -> Operator {
        match self {
            Value::Scalar(c) => Operator::identity(n).scale(c),
            Value::Op(o) => o,
        }
    }
}

fn atom(op: AtomOp, site: usize, col: usize, space: &HilbertSpace) -> Result<Operator, SpecError> {
    if op == AtomOp::Identity {
        return Ok(Operator::identity(space.dim()));
    }
    let name = format!("{}{}", op.symbol(), site);
    let factors = space.factors();
    if site == 0 || site > factors.len() {
        return Err(SpecError::SiteRange {
            name,
            col,
            site,
            factors: factors.len(),
        });
    }
    let factor = factors[site - 1];
    let kind_name = |k: FactorKind| match k {
        FactorKind::Qubit => "qubit",
        FactorKind::Fock => "fock",
    };
    let wanted = if op.is_qubit() {
        FactorKind::Qubit
    } else {
        FactorKind::Fock
    };
    if factor.kind != wanted {
        return Err(SpecError::SiteKind {
            name,
            col,
            site,
            expected: kind_name(wanted).into(),
            found: kind_name(factor.kind).into(),
        });
    }
    let local = match op {
        AtomOp::X => pauli_x(),
        AtomOp::Y => pauli_y(),
        AtomOp::Z => pauli_z(),
        AtomOp::SigmaPlus => sigma_plus(),
        AtomOp::SigmaMinus => sigma_minus(),
        AtomOp::Annihilate => annihilation(factor.dim),
        AtomOp::Create => creation(factor.dim),
        AtomOp::Number => number(factor.dim),
        AtomOp::Identity => unreachable!(),
    };
    Ok(embed(site - 1, &local, space).expect("site checked above"))
}

fn eval(e: &Expr, space: &HilbertSpace, params: &BTreeMap<String, f64>) -> Result<Value, SpecError> {
    let n = space.dim();
    Ok(match &e.kind {
        ExprKind::Scalar(c) => Value::Scalar(*c),
        ExprKind::Param(name) => match params.get(name) {
            Some(v) => Value::Scalar(C64::new(*v, 0.0)),
            None if name.ends_with(|c: char| c.is_ascii_digit()) => {
                return Err(SpecError::UnknownIdentifier {
                    name: name.clone(),
                    col: e.col,
                })
            }
            None => {
                return Err(SpecError::UnboundParameter {
                    name: name.clone(),
                    col: e.col,
                })
            }
        },
        ExprKind::Atom(op, site) => Value::Op(atom(*op, *site, e.col, space)?),
        ExprKind::Negate(a) => match eval(a, space, params)? {
            Value::Scalar(c) => Value::Scalar(-c),
            Value::Op(o) => Value::Op(-o),
        },
        ExprKind::Adjoint(a) => match eval(a, space, params)? {
            Value::Scalar(c) => Value::Scalar(c.conj()),
            Value::Op(o) => Value::Op(o.adjoint()),
        },
        ExprKind::Power(a, k) => match eval(a, space, params)? {
            Value::Scalar(c) => Value::Scalar(c.powu(*k)),
            Value::Op(o) => Value::Op(o.pow(*k)),
        },
        ExprKind::Product(a, b) => {
            match (eval(a, space, params)?, eval(b, space, params)?) {
                (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
                (Value::Scalar(x), Value::Op(o)) | (Value::Op(o), Value::Scalar(x)) => {
                    Value::Op(o.scale(x))
                }
                (Value::Op(x), Value::Op(y)) => Value::Op(&x * &y),
            }
        }
        ExprKind::Sum(a, b) | ExprKind::Difference(a, b) => {
            let sign = if matches!(e.kind, ExprKind::Sum(..)) { 1.0 } else { -1.0 };
            match (eval(a, space, params)?, eval(b, space, params)?) {
                (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + sign * y),
                (x, y) => {
                    let (x, y) = (x.into_op(n), y.into_op(n));
                    Value::Op(if sign > 0.0 { &x + &y } else { &x - &y })
                }
            }
        }
    })
}

/// Evaluates an expression on `space`; a bare scalar becomes a multiple of
/// the identity.
pub fn evaluate(
    e: &Expr,
    space: &HilbertSpace,
    params: &BTreeMap<String, f64>,
) -> Result<Operator, SpecError> {
    Ok(eval(e, space, params)?.into_op(space.dim()))
}

pub fn evaluate_str(
    src: &str,
    space: &HilbertSpace,
    params: &BTreeMap<String, f64>,
) -> Result<Operator, SpecError> {
    evaluate(&parse_str(src)?, space, params)
}

/// Parameter names must be identifiers that do not shadow an operator atom.
pub(crate) fn valid_parameter_name(name: &str) -> bool {
    let mut chars = name.chars();
    let first_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    first_ok
        && chars.all(|c| c.is_ascii_alphanumeric())
        && split_atom(name).is_none()
        && name != "dag"
        && name != "i"
}
