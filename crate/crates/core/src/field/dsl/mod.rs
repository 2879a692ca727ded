//! A small expression language for admissible fields.
//!
//! Cells are defined per input-isomorphism class. Inside a `cells` block an
//! expression sees its own state `self` and the states of its inputs only
//! through symmetric reductions over all inputs of one arrow type, so the
//! resulting field is admissible by construction. A `raw cells` block names
//! one representative cell and may read its inputs by position; it is
//! symmetrized over the cell's input symmetries before use. The grammar is
//! documented in the repository README.

mod compile;
mod eval;
mod lexer;
mod parser;

use alloc::string::String;
use core::fmt;

pub use compile::{parse_field, parse_field_with, parse_unsymmetrized, FieldSpec, UnsymmetrizedField};

/// Line and column (1-based, in characters) of a token.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DslErrorKind {
    Syntax,
    UnknownName,
    UnknownCell,
    UnknownArrowType,
    /// An aggregate names an arrow type the cell has no inputs of.
    MissingArrowType,
    /// Positional input access outside a `raw` block.
    AsymmetricAccess,
    Shape,
    Redefinition,
    UndefinedClass,
    UnknownParameter,
    /// A constant expression failed to evaluate.
    Domain,
}

impl DslErrorKind {
    /// Stable machine-readable code.
    pub fn code(self) -> &'static str {
        match self {
            DslErrorKind::Syntax => "syntax",
            DslErrorKind::UnknownName => "unknown-name",
            DslErrorKind::UnknownCell => "unknown-cell",
            DslErrorKind::UnknownArrowType => "unknown-arrow-type",
            DslErrorKind::MissingArrowType => "missing-arrow-type",
            DslErrorKind::AsymmetricAccess => "asymmetric-access",
            DslErrorKind::Shape => "shape",
            DslErrorKind::Redefinition => "redefinition",
            DslErrorKind::UndefinedClass => "undefined-class",
            DslErrorKind::UnknownParameter => "unknown-parameter",
            DslErrorKind::Domain => "domain",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DslError {
    pub kind: DslErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl DslError {
    pub(crate) fn new(kind: DslErrorKind, pos: Pos, message: String) -> Self {
        Self { kind, line: pos.line, col: pos.col, message }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}:{}: {}", self.line, self.col, self.message)
        }
    }
}

impl core::error::Error for DslError {}
