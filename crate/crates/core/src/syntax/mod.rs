//! Formula AST, concrete grammar, parser and printer.
//!
//! Concrete syntax summary:
//!
//! ```text
//! formula  := prefix* matrix
//! prefix   := ("forall" | "exists") ident ("," ident)* "."
//! matrix   := iff ; iff := imp ("<=>" imp)* ; imp := or ("=>" imp)?
//! or       := and ("|" and)* ; and := not ("&" not)* ; not := "!" not | atom
//! atom     := "true" | "false" | term "=" term | term "in" regex-item
//!           | term ("=="|"!="|"<"|"<="|">"|">=") term
//!           | "len" "(" term ")" rel nat | "(" matrix ")"
//! term     := concat (("+"|"-") concat)*
//! concat   := postfix ("++" postfix)*
//! postfix  := primary ("[" int ":" int "]")*
//! primary  := ident | "eps" | int | "first(" term ")" | "last(" term ")"
//!           | "rev(" term ")" | "old(" ident ")" | "(" term ")"
//! ```

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

mod ast;
pub(crate) mod lexer;
pub(crate) mod parser;
mod printer;

pub use ast::*;
pub use printer::{print_formula, print_int, print_matrix, print_regex, print_seq};

/// Half-open byte range in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn contains(self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// Source locations mirroring the AST: one node per AST node, children in
/// the order the AST stores them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    pub fn leaf(span: Span) -> SpanTree {
        SpanTree {
            span,
            children: Vec::new(),
        }
    }

    pub fn node(span: Span, children: Vec<SpanTree>) -> SpanTree {
        SpanTree { span, children }
    }

    /// True when every child span lies inside its parent's span.
    pub fn is_nested(&self) -> bool {
        self.children
            .iter()
            .all(|c| self.span.contains(c.span) && c.is_nested())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntaxError {
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    /// Input uses a construct outside the decidable fragment.
    Fragment {
        line: usize,
        col: usize,
        message: String,
    },
}

impl SyntaxError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            SyntaxError::Parse { line, col, .. } | SyntaxError::Fragment { line, col, .. } => {
                (*line, *col)
            }
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxError::Parse { line, col, message } => {
                write!(f, "parse error at {line}:{col}: {message}")
            }
            SyntaxError::Fragment { line, col, message } => {
                write!(f, "unsupported fragment at {line}:{col}: {message}")
            }
        }
    }
}

impl core::error::Error for SyntaxError {}

/// Parses a formula in the surface syntax.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    parse_formula_spanned(text).map(|(f, _)| f)
}

/// Parses a formula and returns the source span of every node.
pub fn parse_formula_spanned(text: &str) -> Result<(Formula, SpanTree), SyntaxError> {
    parse_with(text, false)
}

/// Like [`parse_formula`] but also accepts generated `$` names, so that
/// formulas printed after elaboration or VC generation can be read back.
pub fn parse_formula_internal(text: &str) -> Result<Formula, SyntaxError> {
    parse_with(text, true).map(|(f, _)| f)
}

fn parse_with(text: &str, allow_internal: bool) -> Result<(Formula, SpanTree), SyntaxError> {
    let mut p = parser::Parser::new(text, allow_internal)?;
    let out = p.formula()?;
    p.expect_eof()?;
    Ok(out)
}

#[cfg(test)]
mod tests;
