//! Program syntax.
//!
//! ```text
//! program   := (predicate | routine)*
//! predicate := "predicate" name "(" ids ")" ":=" assertion
//! routine   := "routine" name "(" ids? ")" ("local" ids)? ("require" assertion)?
//!              "do" stmts ("ensure" assertion)? "end"
//! stmt      := "skip" | "assert" assertion | "assume" assertion | "havoc" ids
//!            | "if" assertion "then" stmts ("else" stmts)? "end"
//!            | "from" stmts ("invariant" assertion)? "until" assertion "loop" stmts "end"
//!            | "split" id "into" id "," id
//!            | id ".push(" term ")" | id ".extend(" term ")" | id ".pop"
//!            | ids ":=" rhs ("," rhs)*
//! rhs       := term | name "(" terms ")"
//! assertion := formula matrix syntax, plus "forall ids . assertion" anywhere
//!              and calls of previously defined predicates
//! ```
//!
//! `x.first`, `x.last`, `x.top` and `x.rest` abbreviate `first(x)`,
//! `last(x)`, `last(x)` and `x[2:0]`. Semicolons between statements are
//! optional.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Lines, Names, Predicate, Program, Prop, Rhs, Routine, Stmt, StmtKind};
use crate::syntax::lexer::Tok;
use crate::syntax::parser::{PResult, Parser};
use crate::syntax::{Matrix, SeqTerm, Span, SyntaxError};

/// Parses a program.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser::new(text, false)?;
    desugar(&mut p.toks);
    let mut pp = ProgParser {
        p,
        predicates: BTreeMap::new(),
    };
    pp.program()
}

const STOP: &[&str] = &["end", "else", "until", "invariant", "ensure", "loop"];

fn desugar(toks: &mut Vec<(Tok, Span)>) {
    let mut i = 0;
    while i + 2 < toks.len() {
        let adjacent = toks[i].1.end == toks[i + 1].1.start && toks[i + 1].1.end == toks[i + 2].1.start;
        let called = matches!(toks.get(i + 3), Some((Tok::LParen, _)));
        let (Tok::Ident(x), Tok::Dot) = (&toks[i].0, &toks[i + 1].0) else {
            i += 1;
            continue;
        };
        if !adjacent || called {
            i += 1;
            continue;
        }
        let span = Span::new(toks[i].1.start, toks[i + 2].1.end);
        let var = Tok::Ident(x.clone());
        let with = |t: Tok| (t, span);
        let repl: Option<Vec<(Tok, Span)>> = match &toks[i + 2].0 {
            Tok::First => Some(vec![with(Tok::First), with(Tok::LParen), with(var), with(Tok::RParen)]),
            Tok::Last => Some(vec![with(Tok::Last), with(Tok::LParen), with(var), with(Tok::RParen)]),
            Tok::Ident(m) if m == "top" || m == "last" => {
                Some(vec![with(Tok::Last), with(Tok::LParen), with(var), with(Tok::RParen)])
            }
            Tok::Ident(m) if m == "rest" => Some(vec![
                with(var),
                with(Tok::LBracket),
                with(Tok::Int(2)),
                with(Tok::Colon),
                with(Tok::Int(0)),
                with(Tok::RBracket),
            ]),
            _ => None,
        };
        match repl {
            Some(r) => {
                let n = r.len();
                toks.splice(i..i + 3, r);
                i += n;
            }
            None => i += 1,
        }
    }
}

struct ProgParser<'s> {
    p: Parser<'s>,
    predicates: BTreeMap<String, Predicate>,
}

impl ProgParser<'_> {
    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.p.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.p.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self
                .p
                .error_here(format!("expected `{kw}`, found {}", self.p.peek().describe())))
        }
    }

    fn line(&self, offset: usize) -> usize {
        self.p.src.line_col(offset).0
    }

    fn lines_from(&self, start: usize) -> Lines {
        Lines {
            first: self.line(start),
            last: self.line(self.p.prev_end().max(start + 1) - 1),
        }
    }

    fn ids(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.p.expect_ident()?.0];
        while self.p.eat(&Tok::Comma) {
            out.push(self.p.expect_ident()?.0);
        }
        Ok(out)
    }

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            if *self.p.peek() == Tok::Eof {
                return Ok(prog);
            }
            if self.eat_kw("predicate") {
                let pred = self.predicate()?;
                self.predicates.insert(pred.name.clone(), pred.clone());
                prog.predicates.push(pred);
            } else if self.is_kw("routine") {
                prog.routines.push(self.routine()?);
            } else {
                return Err(self.p.error_here(format!(
                    "expected `predicate` or `routine`, found {}",
                    self.p.peek().describe()
                )));
            }
        }
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        let (name, _) = self.p.expect_ident()?;
        self.p.expect(&Tok::LParen, "`(`")?;
        let params = self.ids()?;
        self.p.expect(&Tok::RParen, "`)`")?;
        self.p.expect(&Tok::Assign, "`:=`")?;
        let body = self.assertion()?;
        Ok(Predicate { name, params, body })
    }

    fn routine(&mut self) -> PResult<Routine> {
        let start = self.p.span().start;
        self.expect_kw("routine")?;
        let (name, _) = self.p.expect_ident()?;
        self.p.expect(&Tok::LParen, "`(`")?;
        let params = if *self.p.peek() == Tok::RParen {
            Vec::new()
        } else {
            self.ids()?
        };
        self.p.expect(&Tok::RParen, "`)`")?;
        let locals = if self.eat_kw("local") { self.ids()? } else { Vec::new() };
        let require = if self.eat_kw("require") {
            self.assertion()?
        } else {
            Prop::truth()
        };
        self.expect_kw("do")?;
        let body = self.stmts()?;
        let (ensure, ensure_lines) = if self.is_kw("ensure") {
            let at = self.p.span().start;
            self.p.bump();
            let e = self.assertion()?;
            (e, self.lines_from(at))
        } else {
            let l = self.line(self.p.span().start);
            (Prop::truth(), Lines { first: l, last: l })
        };
        self.expect_kw("end")?;
        Ok(Routine {
            name,
            params,
            locals,
            require,
            body,
            ensure,
            ensure_lines,
            lines: self.lines_from(start),
        })
    }

    fn stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            while self.p.eat(&Tok::Semi) {}
            if *self.p.peek() == Tok::Eof || STOP.iter().any(|k| self.is_kw(k)) {
                return Ok(out);
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.p.span().start;
        let kind = self.stmt_kind()?;
        Ok(Stmt {
            kind,
            lines: self.lines_from(start),
        })
    }

    fn stmt_kind(&mut self) -> PResult<StmtKind> {
        if self.eat_kw("skip") {
            return Ok(StmtKind::Skip);
        }
        if self.eat_kw("assert") {
            return Ok(StmtKind::Assert(self.assertion()?));
        }
        if self.eat_kw("assume") {
            return Ok(StmtKind::Assume(self.assertion()?));
        }
        if self.eat_kw("havoc") {
            return Ok(StmtKind::Havoc(self.ids()?));
        }
        if self.eat_kw("if") {
            let c = self.assertion()?;
            self.expect_kw("then")?;
            let a = self.stmts()?;
            let b = if self.eat_kw("else") { self.stmts()? } else { Vec::new() };
            self.expect_kw("end")?;
            return Ok(StmtKind::If(c, a, b));
        }
        if self.eat_kw("from") {
            let init = self.stmts()?;
            let invariant = if self.eat_kw("invariant") {
                Some(self.assertion()?)
            } else {
                None
            };
            self.expect_kw("until")?;
            let until = self.assertion()?;
            self.expect_kw("loop")?;
            let body = self.stmts()?;
            self.expect_kw("end")?;
            return Ok(StmtKind::Loop {
                init,
                invariant,
                until,
                body,
            });
        }
        if self.eat_kw("split") {
            let (a, _) = self.p.expect_ident()?;
            self.expect_kw("into")?;
            let (l, _) = self.p.expect_ident()?;
            self.p.expect(&Tok::Comma, "`,`")?;
            let (r, _) = self.p.expect_ident()?;
            return Ok(StmtKind::Split(a, l, r));
        }
        let (x, _) = self.p.expect_ident()?;
        if self.p.eat(&Tok::Dot) {
            let (m, _) = self.p.expect_ident()?;
            let rhs = match m.as_str() {
                "push" | "extend" => {
                    self.p.expect(&Tok::LParen, "`(`")?;
                    let (e, _) = self.p.term()?.into_seq();
                    self.p.expect(&Tok::RParen, "`)`")?;
                    SeqTerm::concat(SeqTerm::var(&x), e)
                }
                "pop" => SeqTerm::sub(SeqTerm::var(&x), 1, -1),
                _ => return Err(self.p.error_here(format!("unknown operation `{m}`"))),
            };
            return Ok(StmtKind::Assign(vec![(x, Rhs::Term(rhs))]));
        }
        let mut targets = vec![x];
        while self.p.eat(&Tok::Comma) {
            targets.push(self.p.expect_ident()?.0);
        }
        self.p.expect(&Tok::Assign, "`:=`")?;
        let mut rhss = vec![self.rhs()?];
        while self.p.eat(&Tok::Comma) {
            rhss.push(self.rhs()?);
        }
        if rhss.len() != targets.len() {
            return Err(self.p.error_here(format!(
                "{} targets but {} values",
                targets.len(),
                rhss.len()
            )));
        }
        Ok(StmtKind::Assign(targets.into_iter().zip(rhss).collect()))
    }

    fn rhs(&mut self) -> PResult<Rhs> {
        if let (Tok::Ident(f), Tok::LParen) = (self.p.peek().clone(), self.p.peek_at(1)) {
            self.p.bump();
            self.p.bump();
            let mut args = Vec::new();
            if *self.p.peek() != Tok::RParen {
                loop {
                    args.push(self.p.term()?.into_seq().0);
                    if !self.p.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.p.expect(&Tok::RParen, "`)`")?;
            return Ok(Rhs::Call(f, args));
        }
        Ok(Rhs::Term(self.p.term()?.into_seq().0))
    }

    // -- assertions ----------------------------------------------------------

    fn assertion(&mut self) -> PResult<Prop> {
        let mut a = self.imp()?;
        while self.p.eat(&Tok::Iff) {
            let b = self.imp()?;
            a = match (a, b) {
                (Prop::Mat(x), Prop::Mat(y)) => Prop::Mat(Matrix::iff(x, y)),
                (a, b) => Prop::and(Prop::imp(a.clone(), b.clone()), Prop::imp(b, a)),
            };
        }
        Ok(a)
    }

    fn imp(&mut self) -> PResult<Prop> {
        let a = self.or()?;
        if self.p.eat(&Tok::Imp) {
            let b = self.imp()?;
            return Ok(Prop::imp(a, b));
        }
        Ok(a)
    }

    fn or(&mut self) -> PResult<Prop> {
        let mut a = self.and()?;
        while self.p.eat(&Tok::Bar) {
            a = Prop::or(a, self.and()?);
        }
        Ok(a)
    }

    fn and(&mut self) -> PResult<Prop> {
        let mut a = self.not()?;
        while self.p.eat(&Tok::Amp) {
            a = Prop::and(a, self.not()?);
        }
        Ok(a)
    }

    fn not(&mut self) -> PResult<Prop> {
        if self.p.eat(&Tok::Bang) {
            return Ok(Prop::not(self.not()?));
        }
        self.leaf()
    }

    fn leaf(&mut self) -> PResult<Prop> {
        match self.p.peek().clone() {
            Tok::Forall => {
                self.p.bump();
                let vs = self.ids()?;
                self.p.expect(&Tok::Dot, "`.`")?;
                let body = self.assertion()?;
                Ok(Prop::forall(vs, body))
            }
            Tok::Exists => Err(self
                .p
                .error_here("existential quantifiers are not supported in assertions")),
            Tok::Ident(name) if *self.p.peek_at(1) == Tok::LParen => {
                let Some(pred) = self.predicates.get(&name).cloned() else {
                    return Err(self.p.error_here(format!("unknown predicate `{name}`")));
                };
                self.p.bump();
                self.p.bump();
                let mut args = Vec::new();
                loop {
                    args.push(self.p.term()?.into_seq().0);
                    if !self.p.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.p.expect(&Tok::RParen, "`)`")?;
                if args.len() != pred.params.len() {
                    return Err(self.p.error_here(format!(
                        "`{name}` takes {} arguments",
                        pred.params.len()
                    )));
                }
                let mut names = Names::default();
                let mut seen = BTreeSet::new();
                pred.body.collect_all(&mut seen);
                for a in &args {
                    a.collect_vars(&mut seen);
                }
                for x in &seen {
                    names.reserve(x);
                }
                let map = pred.params.iter().cloned().zip(args).collect();
                Ok(pred.body.subst(&map, &mut names))
            }
            Tok::LParen => {
                let save = self.p.pos;
                if let Ok((a, _)) = self.p.term_atom() {
                    return Ok(Prop::Mat(Matrix::Atom(a)));
                }
                self.p.pos = save;
                self.p.bump();
                let a = self.assertion()?;
                self.p.expect(&Tok::RParen, "`)`")?;
                Ok(a)
            }
            _ => Ok(Prop::Mat(self.p.atom()?.0)),
        }
    }
}
