//! Model description files and the operator expression language.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary ("*" unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" uint)?
//! primary := "(" expr ")" | "dag" "(" expr ")" | ident | number | "i"
//! ```
//!
//! `^` binds tighter than unary minus, which binds tighter than `*`.
//! Atoms carry a 1-based site label: `X1 Y1 Z1 Sp1 Sm1` on qubits,
//! `a1 ad1 n1` on Fock factors, and `I` is the full identity.

mod eval;
mod file;
mod lexer;
mod parser;

use thiserror::Error;

pub use eval::{evaluate, evaluate_str};
pub use file::{load_model, parse_model, ModelFile, SpaceDecl, SpaceKind};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_str, pretty, AtomOp, Expr, ExprKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("illegal character '{ch}' at column {col}")]
    IllegalCharacter { ch: char, col: usize },

    #[error("malformed number '{text}' at column {col}")]
    BadNumber { text: String, col: usize },

    #[error("unexpected {found} at column {col}, expected {expected}")]
    Unexpected {
        found: String,
        col: usize,
        expected: String,
    },

    #[error("unbalanced parentheses: {detail} at column {col}")]
    Unbalanced { detail: String, col: usize },

    #[error("unknown identifier '{name}' at column {col}")]
    UnknownIdentifier { name: String, col: usize },

    #[error("unbound parameter '{name}' at column {col}")]
    UnboundParameter { name: String, col: usize },

    #[error("'{name}' at column {col} acts on a {expected} factor but site {site} is {found}")]
    SiteKind {
        name: String,
        col: usize,
        site: usize,
        expected: String,
        found: String,
    },

    #[error("site {site} of '{name}' at column {col} is outside 1..={factors}")]
    SiteRange {
        name: String,
        col: usize,
        site: usize,
        factors: usize,
    },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{field}: {source}")]
    InField {
        field: String,
        #[source]
        source: Box<SpecError>,
    },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl SpecError {
    /// Column of the offending token, when the error has one.
    pub fn column(&self) -> Option<usize> {
        match self {
            SpecError::IllegalCharacter { col, .. }
            | SpecError::BadNumber { col, .. }
            | SpecError::Unexpected { col, .. }
            | SpecError::Unbalanced { col, .. }
            | SpecError::UnknownIdentifier { col, .. }
            | SpecError::UnboundParameter { col, .. }
            | SpecError::SiteKind { col, .. }
            | SpecError::SiteRange { col, .. } => Some(*col),
            SpecError::InField { source, .. } => source.column(),
            SpecError::Schema { .. } | SpecError::Io { .. } => None,
        }
    }
}
