use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Source, Tok};
use super::{Span, SpanTree, SyntaxError};

/// A term before its sequence/integer role is known.
#[derive(Clone, Debug)]
pub(crate) struct PTerm {
    pub kind: PKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub(crate) enum PKind {
    Var(String),
    Eps,
    Int(i64),
    Concat(Box<PTerm>, Box<PTerm>),
    Add(Box<PTerm>, Box<PTerm>),
    Minus(Box<PTerm>, Box<PTerm>),
    Slice(Box<PTerm>, i64, i64),
    Rev(Box<PTerm>),
}

impl PTerm {
    /// Interprets the term in sequence position.
    pub fn into_seq(self) -> (SeqTerm, SpanTree) {
        let span = self.span;
        match self.kind {
            PKind::Var(v) => (SeqTerm::Var(v), SpanTree::leaf(span)),
            PKind::Eps => (SeqTerm::Empty, SpanTree::leaf(span)),
            PKind::Int(_) | PKind::Add(..) | PKind::Minus(..) => {
                let (t, st) = self.into_int();
                (SeqTerm::int(t), SpanTree::node(span, vec![st]))
            }
            PKind::Concat(a, b) => {
                let (a, sa) = a.into_seq();
                let (b, sb) = b.into_seq();
                (SeqTerm::concat(a, b), SpanTree::node(span, vec![sa, sb]))
            }
            PKind::Slice(a, k1, k2) => {
                let (a, sa) = a.into_seq();
                (SeqTerm::sub(a, k1, k2), SpanTree::node(span, vec![sa]))
            }
            PKind::Rev(a) => {
                let (a, sa) = a.into_seq();
                (SeqTerm::rev(a), SpanTree::node(span, vec![sa]))
            }
        }
    }

    /// Interprets the term in integer position.
    pub fn into_int(self) -> (IntTerm, SpanTree) {
        let span = self.span;
        match self.kind {
            PKind::Int(k) => (IntTerm::lit(k), SpanTree::leaf(span)),
            PKind::Add(a, b) => {
                let (a, sa) = a.into_int();
                let (b, sb) = b.into_int();
                (IntTerm::add(a, b), SpanTree::node(span, vec![sa, sb]))
            }
            PKind::Minus(a, b) => {
                let (a, sa) = a.into_int();
                let (b, sb) = b.into_int();
                (IntTerm::sub(a, b), SpanTree::node(span, vec![sa, sb]))
            }
            _ => {
                let (s, st) = self.into_seq();
                (IntTerm::seq(s), SpanTree::node(span, vec![st]))
            }
        }
    }
}

/// Recursive-descent parser over a token vector. Also used by the program
/// parser, which embeds formulas and terms in statements.
pub(crate) struct Parser<'s> {
    pub src: Source<'s>,
    pub toks: Vec<(Tok, Span)>,
    pub pos: usize,
}

pub(crate) type PResult<T> = Result<T, SyntaxError>;

impl<'s> Parser<'s> {
    pub fn new(text: &'s str, allow_internal: bool) -> PResult<Self> {
        let src = Source::new(text);
        let toks = tokenize(&src, allow_internal)?;
        Ok(Parser { src, toks, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    pub fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].1.end
        }
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error_here(&self, message: impl Into<String>) -> SyntaxError {
        self.src.parse_error(self.span().start, message)
    }

    pub fn expect(&mut self, t: &Tok, what: &str) -> PResult<Span> {
        if self.peek() == t {
            let sp = self.span();
            self.bump();
            Ok(sp)
        } else {
            Err(self.error_here(format!(
                "expected {what}, found {}",
                self.peek().describe()
            )))
        }
    }

    pub fn expect_ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let sp = self.span();
                self.bump();
                Ok((name, sp))
            }
            other => Err(self.error_here(format!("expected identifier, found {}", other.describe()))),
        }
    }

    pub fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error_here(format!("unexpected {}", self.peek().describe())))
        }
    }

    // -- formulas ----------------------------------------------------------

    pub fn formula(&mut self) -> PResult<(Formula, SpanTree)> {
        let start = self.span().start;
        let mut prefix: Vec<(Quant, String)> = Vec::new();
        while matches!(self.peek(), Tok::Forall | Tok::Exists) {
            let at = self.span().start;
            let q = if self.bump() == Tok::Forall {
                Quant::Forall
            } else {
                Quant::Exists
            };
            if let Some((q0, _)) = prefix.first() {
                if *q0 != q {
                    return Err(self.src.fragment_error(
                        at,
                        "mixed quantifier prefixes (forall/exists alternation) are undecidable; \
                         only all-forall or all-exists prefixes are supported",
                    ));
                }
            }
            loop {
                let (name, _) = self.expect_ident()?;
                prefix.push((q, name));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::Dot, "`.` after quantified variables")?;
        }
        let (matrix, mt) = self.matrix()?;
        let span = Span::new(start, self.prev_end().max(start));
        Ok((Formula { prefix, matrix }, SpanTree::node(span, vec![mt])))
    }

    pub fn matrix(&mut self) -> PResult<(Matrix, SpanTree)> {
        self.iff()
    }

    fn iff(&mut self) -> PResult<(Matrix, SpanTree)> {
        let (mut lhs, mut ls) = self.imp()?;
        while self.eat(&Tok::Iff) {
            let (rhs, rs) = self.imp()?;
            let span = ls.span.join(rs.span);
            lhs = Matrix::iff(lhs, rhs);
            ls = SpanTree::node(span, vec![ls, rs]);
        }
        Ok((lhs, ls))
    }

    fn imp(&mut self) -> PResult<(Matrix, SpanTree)> {
        let (lhs, ls) = self.or()?;
        if self.eat(&Tok::Imp) {
            let (rhs, rs) = self.imp()?;
            let span = ls.span.join(rs.span);
            return Ok((Matrix::imp(lhs, rhs), SpanTree::node(span, vec![ls, rs])));
        }
        Ok((lhs, ls))
    }

    fn or(&mut self) -> PResult<(Matrix, SpanTree)> {
        let (mut lhs, mut ls) = self.and()?;
        while self.eat(&Tok::Bar) {
            let (rhs, rs) = self.and()?;
            let span = ls.span.join(rs.span);
            lhs = Matrix::or(lhs, rhs);
            ls = SpanTree::node(span, vec![ls, rs]);
        }
        Ok((lhs, ls))
    }

    fn and(&mut self) -> PResult<(Matrix, SpanTree)> {
        let (mut lhs, mut ls) = self.not()?;
        while self.eat(&Tok::Amp) {
            let (rhs, rs) = self.not()?;
            let span = ls.span.join(rs.span);
            lhs = Matrix::and(lhs, rhs);
            ls = SpanTree::node(span, vec![ls, rs]);
        }
        Ok((lhs, ls))
    }

    fn not(&mut self) -> PResult<(Matrix, SpanTree)> {
        if *self.peek() == Tok::Bang {
            let start = self.span().start;
            self.bump();
            let (inner, is) = self.not()?;
            let span = Span::new(start, is.span.end);
            return Ok((Matrix::not(inner), SpanTree::node(span, vec![is])));
        }
        self.atom()
    }

    pub fn atom(&mut self) -> PResult<(Matrix, SpanTree)> {
        let sp = self.span();
        match self.peek() {
            Tok::True => {
                self.bump();
                Ok((Matrix::True, SpanTree::leaf(sp)))
            }
            Tok::False => {
                self.bump();
                Ok((Matrix::False, SpanTree::leaf(sp)))
            }
            Tok::Forall | Tok::Exists => Err(self.src.fragment_error(
                sp.start,
                "quantifiers inside the matrix are not supported; write the formula in prenex form",
            )),
            Tok::Len => {
                let (a, st) = self.len_atom()?;
                Ok((Matrix::Atom(a), st))
            }
            Tok::LParen => {
                let save = self.pos;
                match self.term_atom() {
                    Ok((a, st)) => Ok((Matrix::Atom(a), st)),
                    Err(e @ SyntaxError::Fragment { .. }) => Err(e),
                    Err(term_err) => {
                        self.pos = save;
                        self.bump();
                        match self.matrix() {
                            Ok((m, ms)) => {
                                let end = self.expect(&Tok::RParen, "`)`")?.end;
                                let _ = end;
                                Ok((m, ms))
                            }
                            Err(e @ SyntaxError::Fragment { .. }) => Err(e),
                            Err(matrix_err) => Err(furthest(term_err, matrix_err)),
                        }
                    }
                }
            }
            _ => {
                let (a, st) = self.term_atom()?;
                Ok((Matrix::Atom(a), st))
            }
        }
    }

    fn len_atom(&mut self) -> PResult<(Atom, SpanTree)> {
        let start = self.span().start;
        self.expect(&Tok::Len, "`len`")?;
        self.expect(&Tok::LParen, "`(`")?;
        let t = self.term()?;
        self.expect(&Tok::RParen, "`)`")?;
        let rel = match self.peek() {
            Tok::Eq | Tok::EqEq => Rel::Eq,
            Tok::Ne => Rel::Ne,
            Tok::Lt => Rel::Lt,
            Tok::Le => Rel::Le,
            Tok::Gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            other => {
                return Err(self.error_here(format!(
                    "expected a length comparison, found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        let k = match self.peek() {
            Tok::Int(k) => *k as u64,
            other => {
                return Err(self.error_here(format!(
                    "length bounds must be nonnegative integer literals, found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        let (s, ss) = t.into_seq();
        let span = Span::new(start, self.prev_end());
        Ok((Atom::LenCmp(s, rel, k), SpanTree::node(span, vec![ss])))
    }

    /// `term = term`, `term in regex`, or an integer comparison.
    pub fn term_atom(&mut self) -> PResult<(Atom, SpanTree)> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Tok::Eq => {
                self.bump();
                let rhs = self.term()?;
                let span = lhs.span.join(rhs.span);
                let (a, sa) = lhs.into_seq();
                let (b, sb) = rhs.into_seq();
                return Ok((Atom::SeqEq(a, b), SpanTree::node(span, vec![sa, sb])));
            }
            Tok::In => {
                self.bump();
                let rstart = self.span().start;
                let r = self.regex_item()?;
                let rspan = Span::new(rstart, self.prev_end());
                let span = lhs.span.join(rspan);
                let (a, sa) = lhs.into_seq();
                return Ok((
                    Atom::InRegex(a, r),
                    SpanTree::node(span, vec![sa, SpanTree::leaf(rspan)]),
                ));
            }
            Tok::EqEq => Rel::Eq,
            Tok::Ne => Rel::Ne,
            Tok::Lt => Rel::Lt,
            Tok::Le => Rel::Le,
            Tok::Gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            other => {
                return Err(self.error_here(format!(
                    "expected `=`, `in` or a comparison, found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        let rhs = self.term()?;
        let span = lhs.span.join(rhs.span);
        let (a, sa) = lhs.into_int();
        let (b, sb) = rhs.into_int();
        Ok((Atom::IntCmp(rel, a, b), SpanTree::node(span, vec![sa, sb])))
    }

    // -- terms -------------------------------------------------------------

    pub fn term(&mut self) -> PResult<PTerm> {
        let mut lhs = self.concat()?;
        loop {
            let plus = match self.peek() {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => break,
            };
            self.bump();
            let rhs = self.concat()?;
            let span = lhs.span.join(rhs.span);
            let kind = if plus {
                PKind::Add(Box::new(lhs), Box::new(rhs))
            } else {
                PKind::Minus(Box::new(lhs), Box::new(rhs))
            };
            lhs = PTerm { kind, span };
        }
        Ok(lhs)
    }

    fn concat(&mut self) -> PResult<PTerm> {
        let mut lhs = self.postfix()?;
        while self.eat(&Tok::PlusPlus) {
            let rhs = self.postfix()?;
            let span = lhs.span.join(rhs.span);
            lhs = PTerm {
                kind: PKind::Concat(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> PResult<PTerm> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::LBracket {
            self.bump();
            let k1 = self.signed_int()?;
            self.expect(&Tok::Colon, "`:` in subsequence bounds")?;
            let k2 = self.signed_int()?;
            let end = self.expect(&Tok::RBracket, "`]`")?.end;
            let span = Span::new(base.span.start, end);
            base = PTerm {
                kind: PKind::Slice(Box::new(base), k1, k2),
                span,
            };
        }
        Ok(base)
    }

    pub fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek() {
            Tok::Int(k) => {
                let k = *k;
                self.bump();
                Ok(if neg { -k } else { k })
            }
            other => Err(self.error_here(format!(
                "expected an integer literal, found {}",
                other.describe()
            ))),
        }
    }

    fn primary(&mut self) -> PResult<PTerm> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(PTerm {
                    kind: PKind::Var(name),
                    span: sp,
                })
            }
            Tok::Eps => {
                self.bump();
                Ok(PTerm {
                    kind: PKind::Eps,
                    span: sp,
                })
            }
            Tok::Int(k) => {
                self.bump();
                Ok(PTerm {
                    kind: PKind::Int(k),
                    span: sp,
                })
            }
            Tok::Minus => {
                if let Tok::Int(k) = self.peek_at(1).clone() {
                    self.bump();
                    let end = self.span().end;
                    self.bump();
                    Ok(PTerm {
                        kind: PKind::Int(-k),
                        span: Span::new(sp.start, end),
                    })
                } else {
                    Err(self.error_here("unary minus applies only to integer literals"))
                }
            }
            Tok::Old => {
                self.bump();
                let paren = self.eat(&Tok::LParen);
                let (name, _) = self.expect_ident()?;
                if paren {
                    self.expect(&Tok::RParen, "`)`")?;
                }
                Ok(PTerm {
                    kind: PKind::Var(format!("old_{name}")),
                    span: Span::new(sp.start, self.prev_end()),
                })
            }
            t @ (Tok::First | Tok::Last | Tok::Rev) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let inner = self.term()?;
                let end = self.expect(&Tok::RParen, "`)`")?.end;
                let span = Span::new(sp.start, end);
                let kind = match t {
                    Tok::First => PKind::Slice(Box::new(inner), 1, 1),
                    Tok::Last => PKind::Slice(Box::new(inner), 0, 0),
                    _ => PKind::Rev(Box::new(inner)),
                };
                Ok(PTerm { kind, span })
            }
            Tok::LParen => {
                self.bump();
                let mut inner = self.term()?;
                let end = self.expect(&Tok::RParen, "`)`")?.end;
                inner.span = Span::new(sp.start, end);
                Ok(inner)
            }
            other => Err(self.error_here(format!("expected a term, found {}", other.describe()))),
        }
    }

    // -- regular expressions -----------------------------------------------

    /// The operand of `in`: a single postfix item.
    pub fn regex_item(&mut self) -> PResult<Regex> {
        self.regex_rep()
    }

    fn regex(&mut self) -> PResult<Regex> {
        let mut lhs = self.regex_cat()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.regex_cat()?;
            lhs = Regex::union(lhs, rhs);
        }
        Ok(lhs)
    }

    fn regex_cat(&mut self) -> PResult<Regex> {
        let mut lhs = self.regex_rep()?;
        while self.starts_regex_base() {
            let rhs = self.regex_rep()?;
            lhs = Regex::concat(lhs, rhs);
        }
        Ok(lhs)
    }

    fn starts_regex_base(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::AnyInt | Tok::Eps | Tok::LBrace | Tok::LParen => true,
            Tok::Minus => matches!(self.peek_at(1), Tok::Int(_)),
            _ => false,
        }
    }

    fn regex_rep(&mut self) -> PResult<Regex> {
        let mut base = self.regex_base()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    base = Regex::Star(Box::new(base));
                }
                Tok::Plus => {
                    self.bump();
                    base = Regex::Plus(Box::new(base));
                }
                Tok::Caret => {
                    self.bump();
                    let n = match self.peek() {
                        Tok::Int(n) if *n <= u32::MAX as i64 => *n as u32,
                        other => {
                            return Err(self.error_here(format!(
                                "expected a repetition count, found {}",
                                other.describe()
                            )))
                        }
                    };
                    self.bump();
                    base = Regex::Power(Box::new(base), n);
                }
                _ => break,
            }
        }
        Ok(base)
    }

    fn regex_base(&mut self) -> PResult<Regex> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => Ok(Regex::Lit(self.signed_int()?)),
            Tok::AnyInt => {
                self.bump();
                Ok(Regex::AnyInt)
            }
            Tok::Eps => {
                self.bump();
                Ok(Regex::Eps)
            }
            Tok::LBrace => {
                self.bump();
                let mut items = vec![self.signed_int()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.signed_int()?);
                }
                self.expect(&Tok::RBrace, "`}`")?;
                Ok(Regex::Set(items))
            }
            Tok::LParen => {
                self.bump();
                let r = self.regex()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(r)
            }
            other => Err(self.error_here(format!(
                "expected a regular expression, found {}",
                other.describe()
            ))),
        }
    }
}

fn furthest(a: SyntaxError, b: SyntaxError) -> SyntaxError {
    if b.position() >= a.position() {
        b
    } else {
        a
    }
}
