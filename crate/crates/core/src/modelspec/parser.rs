use std::fmt;

use super::lexer::{tokenize, Token, TokenKind};
use super::SpecError;
use crate::operator::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomOp {
    Identity,
    X,
    Y,
    Z,
    SigmaPlus,
    SigmaMinus,
    Annihilate,
    Create,
    Number,
}

impl AtomOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AtomOp::Identity => "I",
            AtomOp::X => "X",
            AtomOp::Y => "Y",
            AtomOp::Z => "Z",
            AtomOp::SigmaPlus => "Sp",
            AtomOp::SigmaMinus => "Sm",
            AtomOp::Annihilate => "a",
            AtomOp::Create => "ad",
            AtomOp::Number => "n",
        }
    }

    fn from_prefix(p: &str) -> Option<AtomOp> {
        Some(match p {
            "X" => AtomOp::X,
            "Y" => AtomOp::Y,
            "Z" => AtomOp::Z,
            "Sp" => AtomOp::SigmaPlus,
            "Sm" => AtomOp::SigmaMinus,
            "a" => AtomOp::Annihilate,
            "ad" => AtomOp::Create,
            "n" => AtomOp::Number,
            _ => return None,
        })
    }

    pub fn is_qubit(self) -> bool {
        matches!(
            self,
            AtomOp::X | AtomOp::Y | AtomOp::Z | AtomOp::SigmaPlus | AtomOp::SigmaMinus
        )
    }
}

/// Splits `Z12` into `(Z, 12)`; `None` if the identifier is not an atom.
pub(crate) fn split_atom(name: &str) -> Option<(AtomOp, usize)> {
    if name == "I" {
        return Some((AtomOp::Identity, 0));
    }
    let digits = name.find(|c: char| c.is_ascii_digit())?;
    let (prefix, label) = name.split_at(digits);
    if !label.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let op = AtomOp::from_prefix(prefix)?;
    label.parse().ok().map(|site| (op, site))
}

/// Expression node. Equality ignores source positions.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub col: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Power(Box<Expr>, u32),
    Negate(Box<Expr>),
    Adjoint(Box<Expr>),
    /// Operator symbol with its 1-based site (0 for the identity).
    Atom(AtomOp, usize),
    Scalar(C64),
    Param(String),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, col: 0 }
    }

    fn at(kind: ExprKind, col: usize) -> Self {
        Expr { kind, col }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn col(&self) -> usize {
        self.peek().map(|t| t.col).unwrap_or(self.end_col)
    }

    fn unexpected(&self, expected: &str) -> SpecError {
        SpecError::Unexpected {
            found: self
                .peek()
                .map(|t| t.kind.to_string())
                .unwrap_or_else(|| "end of input".into()),
            col: self.col(),
            expected: expected.into(),
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.term()?;
        loop {
            let col = self.col();
            if self.eat(&TokenKind::Plus) {
                let rhs = self.term()?;
                lhs = Expr::at(ExprKind::Sum(Box::new(lhs), Box::new(rhs)), col);
            } else if self.eat(&TokenKind::Minus) {
                let rhs = self.term()?;
                lhs = Expr::at(ExprKind::Difference(Box::new(lhs), Box::new(rhs)), col);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.unary()?;
        loop {
            let col = self.col();
            if self.eat(&TokenKind::Star) {
                let rhs = self.unary()?;
                lhs = Expr::at(ExprKind::Product(Box::new(lhs), Box::new(rhs)), col);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SpecError> {
        let col = self.col();
        if self.eat(&TokenKind::Minus) {
            let inner = self.unary()?;
            return Ok(Expr::at(ExprKind::Negate(Box::new(inner)), col));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SpecError> {
        let base = self.primary()?;
        let col = self.col();
        if !self.eat(&TokenKind::Caret) {
            return Ok(base);
        }
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Number {
                value,
                imaginary: false,
            }) if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 => {
                self.pos += 1;
                Ok(Expr::at(ExprKind::Power(Box::new(base), value as u32), col))
            }
            _ => Err(self.unexpected("nonnegative integer exponent")),
        }
    }

    fn close(&mut self, open_col: usize) -> Result<(), SpecError> {
        if self.eat(&TokenKind::RParen) {
            Ok(())
        } else if self.peek().is_none() {
            Err(SpecError::Unbalanced {
                detail: "missing ')' for '('".into(),
                col: open_col,
            })
        } else {
            Err(self.unexpected("')' or an operator"))
        }
    }

    fn primary(&mut self) -> Result<Expr, SpecError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("expression"));
        };
        let col = tok.col;
        match tok.kind {
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.close(col)?;
                Ok(inner)
            }
            TokenKind::Dag => {
                self.pos += 1;
                let open = self.col();
                if !self.eat(&TokenKind::LParen) {
                    return Err(self.unexpected("'(' after 'dag'"));
                }
                let inner = self.expr()?;
                self.close(open)?;
                Ok(Expr::at(ExprKind::Adjoint(Box::new(inner)), col))
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                let kind = match split_atom(&name) {
                    Some((op, site)) => ExprKind::Atom(op, site),
                    None => ExprKind::Param(name),
                };
                Ok(Expr::at(kind, col))
            }
            TokenKind::Number { value, imaginary } => {
                self.pos += 1;
                let v = if imaginary {
                    C64::new(0.0, value)
                } else {
                    C64::new(value, 0.0)
                };
                Ok(Expr::at(ExprKind::Scalar(v), col))
            }
            TokenKind::ImagUnit => {
                self.pos += 1;
                Ok(Expr::at(ExprKind::Scalar(C64::new(0.0, 1.0)), col))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

fn run(tokens: Vec<Token>, end_col: usize) -> Result<Expr, SpecError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        end_col,
    };
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(t) if t.kind == TokenKind::RParen => Err(SpecError::Unbalanced {
            detail: "unmatched ')'".into(),
            col: t.col,
        }),
        Some(_) => Err(p.unexpected("operator or end of input")),
    }
}

pub fn parse(tokens: Vec<Token>) -> Result<Expr, SpecError> {
    let end_col = tokens.last().map(|t| t.col + 1).unwrap_or(1);
    run(tokens, end_col)
}

pub fn parse_str(src: &str) -> Result<Expr, SpecError> {
    run(tokenize(src)?, src.chars().count() + 1)
}

fn precedence(kind: &ExprKind) -> u8 {
    match kind {
        ExprKind::Sum(..) | ExprKind::Difference(..) => 1,
        ExprKind::Product(..) => 2,
        ExprKind::Negate(_) => 3,
        ExprKind::Power(..) => 4,
        ExprKind::Scalar(c) if c.re != 0.0 && c.im != 0.0 => 1,
        ExprKind::Scalar(c) if c.re < 0.0 || c.im < 0.0 => 3,
        _ => 5,
    }
}

fn scalar_text(c: C64) -> String {
    if c.im == 0.0 {
        format!("{:?}", c.re)
    } else if c.re == 0.0 {
        format!("{:?}i", c.im)
    } else {
        format!("{:?} + {:?}i", c.re, c.im)
    }
}

fn write_expr(e: &Expr, min: u8, out: &mut String) {
    let prec = precedence(&e.kind);
    let wrap = prec < min;
    if wrap {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Sum(a, b) | ExprKind::Difference(a, b) => {
            write_expr(a, 1, out);
            out.push_str(if matches!(e.kind, ExprKind::Sum(..)) { " + " } else { " - " });
            write_expr(b, 2, out);
        }
        ExprKind::Product(a, b) => {
            write_expr(a, 2, out);
            out.push('*');
            write_expr(b, 3, out);
        }
        ExprKind::Negate(a) => {
            out.push('-');
            write_expr(a, 3, out);
        }
        ExprKind::Power(a, k) => {
            write_expr(a, 5, out);
            out.push('^');
            out.push_str(&k.to_string());
        }
        ExprKind::Adjoint(a) => {
            out.push_str("dag(");
            write_expr(a, 0, out);
            out.push(')');
        }
        ExprKind::Atom(AtomOp::Identity, _) => out.push('I'),
        ExprKind::Atom(op, site) => {
            out.push_str(op.symbol());
            out.push_str(&site.to_string());
        }
        ExprKind::Scalar(c) => out.push_str(&scalar_text(*c)),
        ExprKind::Param(name) => out.push_str(name),
    }
    if wrap {
        out.push(')');
    }
}

/// Source text that parses back to the same tree.
pub fn pretty(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, 0, &mut s);
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(op: AtomOp, site: usize) -> Expr {
        Expr::new(ExprKind::Atom(op, site))
    }

    #[test]
    fn power_of_atom() {
        let e = parse_str("a1^2").unwrap();
        assert_eq!(e, Expr::new(ExprKind::Power(Box::new(atom(AtomOp::Annihilate, 1)), 2)));
    }

    #[test]
    fn negation_binds_to_first_factor() {
        let e = parse_str("-Z1*Z2").unwrap();
        let want = Expr::new(ExprKind::Product(
            Box::new(Expr::new(ExprKind::Negate(Box::new(atom(AtomOp::Z, 1))))),
            Box::new(atom(AtomOp::Z, 2)),
        ));
        assert_eq!(e, want);
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let e = parse_str("-Z1^2").unwrap();
        let want = Expr::new(ExprKind::Negate(Box::new(Expr::new(ExprKind::Power(
            Box::new(atom(AtomOp::Z, 1)),
            2,
        )))));
        assert_eq!(e, want);
    }

    #[test]
    fn missing_operand() {
        let err = parse_str("Z1*(+").unwrap_err();
        assert!(err.to_string().contains("expected expression"), "{err}");
        assert_eq!(err.column(), Some(5));
    }

    #[test]
    fn unbalanced() {
        assert!(matches!(parse_str("(Z1 + X1"), Err(SpecError::Unbalanced { col: 1, .. })));
        assert!(matches!(parse_str("Z1)"), Err(SpecError::Unbalanced { col: 3, .. })));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse_str("X1 - Y1 - Z1").unwrap();
        let ExprKind::Difference(lhs, _) = &e.kind else { panic!() };
        assert!(matches!(lhs.kind, ExprKind::Difference(..)));
    }

    #[test]
    fn pretty_round_trip() {
        for src in [
            "0.5*(I - Z1*Z2)*X2",
            "-Z1*Z2",
            "X1 - (Y1 - Z1)",
            "dag(a1)^2 + 2i*n1",
            "-(a1 + ad1)^3",
            "omega*X2 - -i*Sp1*Sm2",
            "1e-7*X1",
        ] {
            let e = parse_str(src).unwrap();
            let again = parse_str(&pretty(&e)).unwrap();
            assert_eq!(e, again, "{src} -> {}", pretty(&e));
        }
    }
}
