//! Annotated sequence programs and their verification conditions.
//!
//! Programs are written in a small Eiffel-like language (see [`parse_program`])
//! and turned into universally quantified formulas by backward substitution.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::elaborate::apply_reversal_axioms;
use crate::syntax::{
    print_matrix, Atom, Formula, IntTerm, Matrix, Quant, Rel, SeqTerm, SyntaxError,
};
use crate::wordsolver::{check_valid_stats, Budget, BudgetReport, SolveError, Stats, UnknownCause, Validity};

mod parse;

pub use parse::parse_program;

/// An assertion: quantifier-free parts are kept as matrices, universal
/// quantifiers may occur anywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prop {
    Mat(Matrix),
    Forall(Vec<String>, Box<Prop>),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Imp(Box<Prop>, Box<Prop>),
}

impl Prop {
    pub fn truth() -> Prop {
        Prop::Mat(Matrix::True)
    }

    pub fn and(a: Prop, b: Prop) -> Prop {
        match (a, b) {
            (Prop::Mat(x), Prop::Mat(y)) => Prop::Mat(Matrix::and(x, y)),
            (a, b) => {
                let mut items = Vec::new();
                for p in [a, b] {
                    match p {
                        Prop::And(xs) => items.extend(xs),
                        other => items.push(other),
                    }
                }
                Prop::And(items)
            }
        }
    }

    pub fn or(a: Prop, b: Prop) -> Prop {
        match (a, b) {
            (Prop::Mat(x), Prop::Mat(y)) => Prop::Mat(Matrix::or(x, y)),
            (a, b) => {
                let mut items = Vec::new();
                for p in [a, b] {
                    match p {
                        Prop::Or(xs) => items.extend(xs),
                        other => items.push(other),
                    }
                }
                Prop::Or(items)
            }
        }
    }

    pub fn not(a: Prop) -> Prop {
        match a {
            Prop::Mat(x) => Prop::Mat(Matrix::not(x)),
            other => Prop::Not(Box::new(other)),
        }
    }

    pub fn imp(a: Prop, b: Prop) -> Prop {
        match (a, b) {
            (Prop::Mat(x), Prop::Mat(y)) => Prop::Mat(Matrix::imp(x, y)),
            (a, b) => Prop::Imp(Box::new(a), Box::new(b)),
        }
    }

    pub fn forall(vars: Vec<String>, body: Prop) -> Prop {
        if vars.is_empty() {
            body
        } else {
            Prop::Forall(vars, Box::new(body))
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.as_matrix().is_some()
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            Prop::Mat(m) => Some(m),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Prop::Mat(m) => m.collect_vars(out),
            Prop::Forall(vs, b) => {
                for x in b.free_vars() {
                    if !vs.contains(&x) {
                        out.insert(x);
                    }
                }
            }
            Prop::Not(a) => a.collect_free(out),
            Prop::And(xs) | Prop::Or(xs) => xs.iter().for_each(|x| x.collect_free(out)),
            Prop::Imp(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
        }
    }

    fn collect_all(&self, out: &mut BTreeSet<String>) {
        match self {
            Prop::Mat(m) => m.collect_vars(out),
            Prop::Forall(vs, b) => {
                out.extend(vs.iter().cloned());
                b.collect_all(out);
            }
            Prop::Not(a) => a.collect_all(out),
            Prop::And(xs) | Prop::Or(xs) => xs.iter().for_each(|x| x.collect_all(out)),
            Prop::Imp(a, b) => {
                a.collect_all(out);
                b.collect_all(out);
            }
        }
    }

    /// Simultaneous capture-avoiding substitution of sequence variables.
    pub fn subst(&self, map: &BTreeMap<String, SeqTerm>, names: &mut Names) -> Prop {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Prop::Mat(m) => Prop::Mat(subst_matrix(m, map)),
            Prop::Forall(vs, body) => {
                let mut inner = map.clone();
                inner.retain(|x, _| !vs.contains(x));
                let body_free = body.free_vars();
                inner.retain(|x, _| body_free.contains(x));
                if inner.is_empty() {
                    return self.clone();
                }
                let mut captured = BTreeSet::new();
                for t in inner.values() {
                    t.collect_vars(&mut captured);
                }
                let mut vs2 = Vec::new();
                let mut body = (**body).clone();
                for v in vs {
                    if captured.contains(v) {
                        let v2 = names.fresh(v);
                        let ren = BTreeMap::from([(v.clone(), SeqTerm::var(&v2))]);
                        body = body.subst(&ren, names);
                        vs2.push(v2);
                    } else {
                        vs2.push(v.clone());
                    }
                }
                Prop::Forall(vs2, Box::new(body.subst(&inner, names)))
            }
            Prop::Not(a) => Prop::Not(Box::new(a.subst(map, names))),
            Prop::And(xs) => Prop::And(xs.iter().map(|x| x.subst(map, names)).collect()),
            Prop::Or(xs) => Prop::Or(xs.iter().map(|x| x.subst(map, names)).collect()),
            Prop::Imp(a, b) => Prop::Imp(Box::new(a.subst(map, names)), Box::new(b.subst(map, names))),
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |p: &Prop, f: &mut fmt::Formatter<'_>| match p {
            Prop::Mat(Matrix::Atom(_)) | Prop::Mat(Matrix::True) | Prop::Mat(Matrix::False) => {
                write!(f, "{p}")
            }
            _ => write!(f, "({p})"),
        };
        match self {
            Prop::Mat(m) => f.write_str(&print_matrix(m)),
            Prop::Forall(vs, b) => write!(f, "forall {} . {b}", vs.join(", ")),
            Prop::Not(a) => {
                f.write_str("!")?;
                wrap(a, f)
            }
            Prop::And(xs) | Prop::Or(xs) => {
                let op = if matches!(self, Prop::And(_)) { " & " } else { " | " };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    wrap(x, f)?;
                }
                Ok(())
            }
            Prop::Imp(a, b) => {
                wrap(a, f)?;
                f.write_str(" => ")?;
                wrap(b, f)
            }
        }
    }
}

/// Generator of primed variable names that avoid every name seen so far.
#[derive(Clone, Debug, Default)]
pub struct Names {
    used: BTreeSet<String>,
}

impl Names {
    pub fn reserve(&mut self, x: &str) {
        self.used.insert(x.to_string());
    }

    pub fn fresh(&mut self, stem: &str) -> String {
        let mut name = format!("{stem}'");
        while self.used.contains(&name) {
            name.push('\'');
        }
        self.used.insert(name.clone());
        name
    }
}

fn subst_seq(t: &SeqTerm, map: &BTreeMap<String, SeqTerm>) -> SeqTerm {
    match t {
        SeqTerm::Var(x) => map.get(x).cloned().unwrap_or_else(|| t.clone()),
        SeqTerm::Empty => SeqTerm::Empty,
        SeqTerm::Int(i) => SeqTerm::int(subst_int(i, map)),
        SeqTerm::Concat(a, b) => SeqTerm::concat(subst_seq(a, map), subst_seq(b, map)),
        SeqTerm::Sub(a, k1, k2) => SeqTerm::sub(subst_seq(a, map), *k1, *k2),
        SeqTerm::Rev(a) => SeqTerm::rev(subst_seq(a, map)),
    }
}

fn subst_int(t: &IntTerm, map: &BTreeMap<String, SeqTerm>) -> IntTerm {
    match t {
        IntTerm::Seq(s) => IntTerm::seq(subst_seq(s, map)),
        IntTerm::Add(a, b) => IntTerm::add(subst_int(a, map), subst_int(b, map)),
        IntTerm::Sub(a, b) => IntTerm::sub(subst_int(a, map), subst_int(b, map)),
        other => other.clone(),
    }
}

pub fn subst_matrix(m: &Matrix, map: &BTreeMap<String, SeqTerm>) -> Matrix {
    m.map_atoms::<()>(&mut |a| {
        Ok(Matrix::Atom(match a {
            Atom::SeqEq(l, r) => Atom::SeqEq(subst_seq(l, map), subst_seq(r, map)),
            Atom::InRegex(s, r) => Atom::InRegex(subst_seq(s, map), r.clone()),
            Atom::IntCmp(rel, l, r) => Atom::IntCmp(*rel, subst_int(l, map), subst_int(r, map)),
            Atom::LenCmp(s, rel, k) => Atom::LenCmp(subst_seq(s, map), *rel, *k),
        }))
    })
    .unwrap_or_else(|_| unreachable!())
}

// ---------------------------------------------------------------------------
// Programs

/// First and last source line of a construct.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lines {
    pub first: usize,
    pub last: usize,
}

impl fmt::Display for Lines {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first == self.last {
            write!(f, "line {}", self.first)
        } else {
            write!(f, "lines {}-{}", self.first, self.last)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Term(SeqTerm),
    /// A call to a routine, modelled by its contract.
    Call(String, Vec<SeqTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Skip,
    /// Parallel assignment.
    Assign(Vec<(String, Rhs)>),
    Assert(Prop),
    Assume(Prop),
    Havoc(Vec<String>),
    /// `split a into l, r`: arbitrary nonempty `l`, `r` with `a = l ++ r`.
    Split(String, String, String),
    If(Prop, Vec<Stmt>, Vec<Stmt>),
    Loop {
        init: Vec<Stmt>,
        invariant: Option<Prop>,
        until: Prop,
        body: Vec<Stmt>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub lines: Lines,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<String>,
    pub body: Prop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Routine {
    pub name: String,
    pub params: Vec<String>,
    pub locals: Vec<String>,
    pub require: Prop,
    pub body: Vec<Stmt>,
    pub ensure: Prop,
    pub ensure_lines: Lines,
    pub lines: Lines,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub predicates: Vec<Predicate>,
    pub routines: Vec<Routine>,
}

impl Program {
    pub fn routine(&self, name: &str) -> Option<&Routine> {
        self.routines.iter().find(|r| r.name == name)
    }

    fn names(&self) -> Names {
        let mut names = Names::default();
        let mut all = BTreeSet::new();
        for p in &self.predicates {
            all.extend(p.params.iter().cloned());
            p.body.collect_all(&mut all);
        }
        for r in &self.routines {
            all.extend(r.params.iter().cloned());
            all.extend(r.locals.iter().cloned());
            r.require.collect_all(&mut all);
            r.ensure.collect_all(&mut all);
            collect_stmt_names(&r.body, &mut all);
        }
        for x in &all {
            names.reserve(x);
        }
        names
    }
}

fn collect_stmt_names(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Skip => {}
            StmtKind::Assign(xs) => {
                for (x, rhs) in xs {
                    out.insert(x.clone());
                    match rhs {
                        Rhs::Term(t) => t.collect_vars(out),
                        Rhs::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
                    }
                }
            }
            StmtKind::Assert(p) | StmtKind::Assume(p) => p.collect_all(out),
            StmtKind::Havoc(xs) => out.extend(xs.iter().cloned()),
            StmtKind::Split(a, l, r) => out.extend([a.clone(), l.clone(), r.clone()]),
            StmtKind::If(c, a, b) => {
                c.collect_all(out);
                collect_stmt_names(a, out);
                collect_stmt_names(b, out);
            }
            StmtKind::Loop {
                init,
                invariant,
                until,
                body,
            } => {
                collect_stmt_names(init, out);
                if let Some(i) = invariant {
                    i.collect_all(out);
                }
                until.collect_all(out);
                collect_stmt_names(body, out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VcError {
    Syntax(SyntaxError),
    MissingInvariant(Lines),
    UnsupportedStatement(String),
    UnknownRoutine(String),
}

impl fmt::Display for VcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VcError::Syntax(e) => e.fmt(f),
            VcError::MissingInvariant(l) => write!(f, "loop at {l} has no invariant"),
            VcError::UnsupportedStatement(s) => write!(f, "unsupported statement: {s}"),
            VcError::UnknownRoutine(r) => write!(f, "call to unknown routine `{r}`"),
        }
    }
}

impl core::error::Error for VcError {}

impl From<SyntaxError> for VcError {
    fn from(e: SyntaxError) -> Self {
        VcError::Syntax(e)
    }
}

// ---------------------------------------------------------------------------
// Weakest preconditions

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    InvariantInit,
    InvariantInductive,
    /// Intermediate assertions and call preconditions.
    Branch,
    Postcondition,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::InvariantInit => "invariant-init",
            Origin::InvariantInductive => "invariant-inductive",
            Origin::Postcondition => "postcondition",
            Origin::Branch => "branch",
        }
    }
}

/// One proof obligation `hyps => goal`, quantified over its free variables.
#[derive(Clone, Debug)]
struct Obligation {
    origin: Origin,
    anchor: Lines,
    path: Vec<String>,
    hyps: Vec<Prop>,
    goal: Prop,
}

impl Obligation {
    fn new(origin: Origin, anchor: Lines, goal: Prop) -> Obligation {
        Obligation {
            origin,
            anchor,
            path: Vec::new(),
            hyps: Vec::new(),
            goal,
        }
    }

    fn subst(&mut self, map: &BTreeMap<String, SeqTerm>, names: &mut Names) {
        for h in &mut self.hyps {
            *h = h.subst(map, names);
        }
        self.goal = self.goal.subst(map, names);
    }

    fn assume(&mut self, p: Prop) {
        self.hyps.insert(0, p);
    }

    fn to_prop(&self) -> Prop {
        self.hyps
            .iter()
            .rev()
            .fold(self.goal.clone(), |acc, h| Prop::imp(h.clone(), acc))
    }
}

struct Wp<'p> {
    program: &'p Program,
    names: Names,
    side: Vec<Obligation>,
}

impl Wp<'_> {
    fn block(&mut self, stmts: &[Stmt], mut obs: Vec<Obligation>) -> Result<Vec<Obligation>, VcError> {
        for s in stmts.iter().rev() {
            obs = self.stmt(s, obs)?;
        }
        Ok(obs)
    }

    fn stmt(&mut self, s: &Stmt, mut obs: Vec<Obligation>) -> Result<Vec<Obligation>, VcError> {
        match &s.kind {
            StmtKind::Skip => Ok(obs),
            StmtKind::Assign(pairs) => {
                let mut map = BTreeMap::new();
                let mut facts = Vec::new();
                let mut pre = Vec::new();
                for (x, rhs) in pairs {
                    match rhs {
                        Rhs::Term(t) => {
                            map.insert(x.clone(), t.clone());
                        }
                        Rhs::Call(name, args) => {
                            let r = self
                                .program
                                .routine(name)
                                .ok_or_else(|| VcError::UnknownRoutine(name.clone()))?;
                            if r.params.len() != args.len() {
                                return Err(VcError::UnsupportedStatement(format!(
                                    "`{name}` takes {} arguments",
                                    r.params.len()
                                )));
                            }
                            let x2 = self.names.fresh(x);
                            let mut bind: BTreeMap<String, SeqTerm> = r
                                .params
                                .iter()
                                .cloned()
                                .zip(args.iter().cloned())
                                .collect();
                            for (p, a) in r.params.iter().zip(args) {
                                bind.insert(format!("old_{p}"), a.clone());
                            }
                            if r.require != Prop::truth() {
                                pre.push(r.require.subst(&bind, &mut self.names));
                            }
                            bind.insert("Result".into(), SeqTerm::var(&x2));
                            facts.push(r.ensure.subst(&bind, &mut self.names));
                            map.insert(x.clone(), SeqTerm::var(&x2));
                        }
                    }
                }
                for ob in &mut obs {
                    ob.subst(&map, &mut self.names);
                    for f in facts.iter().rev() {
                        ob.assume(f.clone());
                    }
                }
                for p in pre {
                    obs.push(Obligation::new(Origin::Branch, s.lines, p));
                }
                Ok(obs)
            }
            StmtKind::Assert(p) => {
                for ob in &mut obs {
                    ob.assume(p.clone());
                }
                obs.insert(0, Obligation::new(Origin::Branch, s.lines, p.clone()));
                Ok(obs)
            }
            StmtKind::Assume(p) => {
                for ob in &mut obs {
                    ob.assume(p.clone());
                }
                Ok(obs)
            }
            StmtKind::Havoc(xs) => {
                let map: BTreeMap<String, SeqTerm> = xs
                    .iter()
                    .map(|x| (x.clone(), SeqTerm::var(&self.names.fresh(x))))
                    .collect();
                for ob in &mut obs {
                    ob.subst(&map, &mut self.names);
                }
                Ok(obs)
            }
            StmtKind::Split(a, l, r) => {
                let (av, lv, rv) = (SeqTerm::var(a), SeqTerm::var(l), SeqTerm::var(r));
                let cut = Matrix::and_all([
                    Matrix::Atom(Atom::SeqEq(av, SeqTerm::concat(lv.clone(), rv.clone()))),
                    Matrix::Atom(Atom::LenCmp(lv, Rel::Ge, 1)),
                    Matrix::Atom(Atom::LenCmp(rv, Rel::Ge, 1)),
                ]);
                let lines = s.lines;
                let havoc = Stmt {
                    kind: StmtKind::Havoc(vec![l.clone(), r.clone()]),
                    lines,
                };
                let assume = Stmt {
                    kind: StmtKind::Assume(Prop::Mat(cut)),
                    lines,
                };
                self.block(&[havoc, assume], obs)
            }
            StmtKind::If(c, a, b) => {
                let mut out = Vec::new();
                for (branch, cond, tag) in [(a, c.clone(), "then"), (b, Prop::not(c.clone()), "else")] {
                    let first = branch.first().map_or(s.lines.first, |t| t.lines.first);
                    for mut ob in self.block(branch, obs.clone())? {
                        ob.assume(cond.clone());
                        ob.path.insert(0, format!("{tag}-branch at line {first}"));
                        out.push(ob);
                    }
                }
                Ok(out)
            }
            StmtKind::Loop {
                init,
                invariant,
                until,
                body,
            } => {
                let inv = invariant.clone().ok_or(VcError::MissingInvariant(s.lines))?;
                let step = vec![Obligation::new(Origin::InvariantInductive, s.lines, inv.clone())];
                for mut ob in self.block(body, step)? {
                    ob.assume(Prop::not(until.clone()));
                    ob.assume(inv.clone());
                    self.side.push(ob);
                }
                for mut ob in obs {
                    ob.assume(until.clone());
                    ob.assume(inv.clone());
                    ob.path.insert(0, format!("after the loop at {}", s.lines));
                    self.side.push(ob);
                }
                let entry = vec![Obligation::new(Origin::InvariantInit, s.lines, inv)];
                self.block(init, entry)
            }
        }
    }
}

/// Weakest precondition of `stmt` for `post`. Loops contribute their
/// invariant; their side conditions are only reported by [`vcs`].
pub fn wp(program: &Program, stmt: &Stmt, post: &Prop) -> Result<Prop, VcError> {
    wp_block(program, core::slice::from_ref(stmt), post)
}

pub fn wp_block(program: &Program, stmts: &[Stmt], post: &Prop) -> Result<Prop, VcError> {
    let mut w = Wp {
        program,
        names: program.names(),
        side: Vec::new(),
    };
    let mut seen = BTreeSet::new();
    post.collect_all(&mut seen);
    for x in &seen {
        w.names.reserve(x);
    }
    let obs = w.block(stmts, vec![Obligation::new(Origin::Postcondition, Lines::default(), post.clone())])?;
    Ok(obs
        .iter()
        .map(Obligation::to_prop)
        .reduce(Prop::and)
        .unwrap_or_else(Prop::truth))
}

// ---------------------------------------------------------------------------
// Verification conditions

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcLabel {
    pub routine: String,
    pub origin: Origin,
    pub lines: Lines,
    pub path: Vec<String>,
    /// Position among the conjuncts of a split goal, from 1.
    pub part: Option<usize>,
}

impl fmt::Display for VcLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.routine, self.origin.name(), self.lines)?;
        for p in &self.path {
            write!(f, ", {p}")?;
        }
        if let Some(k) = self.part {
            write!(f, ", conjunct {k}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VcStatus {
    Ready,
    /// Quantified hypotheses were dropped.
    Weakened { dropped: usize },
    /// The goal is one of the hypotheses.
    ByAssumption,
    Unencodable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vc {
    pub label: VcLabel,
    /// The obligation as generated, hypotheses included.
    pub text: String,
    /// The universal sentence handed to the solver.
    pub formula: Option<Formula>,
    pub status: VcStatus,
}

/// Splits a goal into conjuncts, moving implication premises and
/// universal quantifiers of each conjunct out of the way.
fn split_goal(goal: &Prop, hyps: &[Prop], names: &Names, out: &mut Vec<(Vec<Prop>, Prop)>) {
    match goal {
        Prop::And(xs) => xs.iter().for_each(|x| split_goal(x, hyps, names, out)),
        Prop::Mat(Matrix::And(a, b)) => {
            split_goal(&Prop::Mat((**a).clone()), hyps, names, out);
            split_goal(&Prop::Mat((**b).clone()), hyps, names, out);
        }
        Prop::Imp(a, b) => {
            let mut h = hyps.to_vec();
            h.push((**a).clone());
            split_goal(b, &h, names, out);
        }
        Prop::Mat(Matrix::Imp(a, b)) => {
            let mut h = hyps.to_vec();
            h.push(Prop::Mat((**a).clone()));
            split_goal(&Prop::Mat((**b).clone()), &h, names, out);
        }
        Prop::Forall(vs, body) => {
            let mut names = names.clone();
            let mut taken = BTreeSet::new();
            for h in hyps {
                h.collect_free(&mut taken);
            }
            let mut map = BTreeMap::new();
            for v in vs {
                if taken.contains(v) {
                    map.insert(v.clone(), SeqTerm::var(&names.fresh(v)));
                }
            }
            let body = body.subst(&map, &mut names);
            split_goal(&body, hyps, &names, out);
        }
        other => out.push((hyps.to_vec(), other.clone())),
    }
}

fn flatten_hyps(hyps: &[Prop], out: &mut Vec<Prop>) {
    for h in hyps {
        match h {
            Prop::And(xs) => flatten_hyps(xs, out),
            Prop::Mat(Matrix::And(a, b)) => {
                flatten_hyps(&[Prop::Mat((**a).clone()), Prop::Mat((**b).clone())], out)
            }
            other => out.push(other.clone()),
        }
    }
}

fn obligation_vcs(routine: &str, ob: &Obligation, names: &Names) -> Vec<Vc> {
    let mut names = names.clone();
    let mut seen = BTreeSet::new();
    ob.goal.collect_all(&mut seen);
    ob.hyps.iter().for_each(|h| h.collect_all(&mut seen));
    seen.iter().for_each(|x| names.reserve(x));
    let mut parts = Vec::new();
    split_goal(&ob.goal, &ob.hyps, &names, &mut parts);
    let many = parts.len() > 1;
    parts
        .into_iter()
        .enumerate()
        .map(|(i, (hyps, goal))| {
            let label = VcLabel {
                routine: routine.to_string(),
                origin: ob.origin,
                lines: ob.anchor,
                path: ob.path.clone(),
                part: many.then_some(i + 1),
            };
            let mut flat = Vec::new();
            flatten_hyps(&hyps, &mut flat);
            let text = if flat.is_empty() {
                goal.to_string()
            } else {
                let shown: Vec<String> = flat
                    .iter()
                    .map(|h| match h {
                        Prop::Mat(Matrix::Atom(_)) | Prop::Mat(Matrix::Not(_)) => h.to_string(),
                        _ => format!("({h})"),
                    })
                    .collect();
                format!("{} => {goal}", shown.join(" & "))
            };
            let Some(g) = goal.as_matrix() else {
                return Vc {
                    label,
                    text,
                    formula: None,
                    status: VcStatus::Unencodable(
                        "universal quantifier under negation or disjunction in the goal".into(),
                    ),
                };
            };
            if flat.iter().any(|h| *h == goal) {
                return Vc {
                    label,
                    text,
                    formula: None,
                    status: VcStatus::ByAssumption,
                };
            }
            let kept: Vec<Matrix> = flat.iter().filter_map(|h| h.as_matrix().cloned()).collect();
            let dropped = flat.len() - kept.len();
            let matrix = if kept.is_empty() {
                g.clone()
            } else {
                Matrix::imp(Matrix::and_all(kept), g.clone())
            };
            let prefix = matrix.vars().into_iter().map(|x| (Quant::Forall, x)).collect();
            Vc {
                label,
                text,
                formula: Some(Formula { prefix, matrix }),
                status: if dropped > 0 {
                    VcStatus::Weakened { dropped }
                } else {
                    VcStatus::Ready
                },
            }
        })
        .collect()
}

/// Verification conditions of every routine, in source order.
pub fn vcs(program: &Program) -> Result<Vec<Vc>, VcError> {
    let mut out = Vec::new();
    for r in &program.routines {
        let mut w = Wp {
            program,
            names: program.names(),
            side: Vec::new(),
        };
        let post = vec![Obligation::new(Origin::Postcondition, r.ensure_lines, r.ensure.clone())];
        let mut entry = w.block(&r.body, post)?;
        // `old x` is `x` on entry
        let snapshot: BTreeMap<String, SeqTerm> = r
            .params
            .iter()
            .map(|p| (format!("old_{p}"), SeqTerm::var(p)))
            .collect();
        for ob in &mut entry {
            ob.subst(&snapshot, &mut w.names);
            if r.require != Prop::truth() {
                ob.assume(r.require.clone());
            }
        }
        let mut all: Vec<Obligation> = entry.into_iter().chain(w.side).collect();
        all.sort_by_key(|ob| (ob.anchor, ob.origin));
        for ob in &all {
            out.extend(obligation_vcs(&r.name, ob, &w.names));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Discharge

/// Replaces each remaining `rev(t)` by a fresh variable `q` constrained by
/// `q = eps <=> t = eps`. The result implies the input's validity.
pub fn abstract_reversals(f: &Formula) -> (Formula, bool) {
    let mut names = Names::default();
    let mut all = f.matrix.vars();
    all.extend(f.prefix.iter().map(|(_, x)| x.clone()));
    for x in &all {
        names.reserve(x);
    }
    let mut table: Vec<(SeqTerm, String)> = Vec::new();
    let matrix = f
        .matrix
        .map_atoms::<()>(&mut |a| {
            let mut go = |t: &SeqTerm| abstract_seq(t, &mut table, &mut names);
            Ok(Matrix::Atom(match a {
                Atom::SeqEq(l, r) => Atom::SeqEq(go(l), go(r)),
                Atom::InRegex(s, r) => Atom::InRegex(go(s), r.clone()),
                Atom::IntCmp(rel, l, r) => Atom::IntCmp(*rel, abstract_int(l, &mut go), abstract_int(r, &mut go)),
                Atom::LenCmp(s, rel, k) => Atom::LenCmp(go(s), *rel, *k),
            }))
        })
        .unwrap_or_else(|_| unreachable!());
    if table.is_empty() {
        return (f.clone(), false);
    }
    let hyps = table.iter().map(|(t, q)| {
        Matrix::iff(
            Matrix::Atom(Atom::SeqEq(SeqTerm::var(q), SeqTerm::Empty)),
            Matrix::Atom(Atom::SeqEq(t.clone(), SeqTerm::Empty)),
        )
    });
    let mut prefix = f.prefix.clone();
    prefix.extend(table.iter().map(|(_, q)| (Quant::Forall, q.clone())));
    let matrix = Matrix::imp(Matrix::and_all(hyps), matrix);
    (Formula { prefix, matrix }, true)
}

fn abstract_int(t: &IntTerm, go: &mut dyn FnMut(&SeqTerm) -> SeqTerm) -> IntTerm {
    match t {
        IntTerm::Seq(s) => IntTerm::seq(go(s)),
        IntTerm::Add(a, b) => IntTerm::add(abstract_int(a, go), abstract_int(b, go)),
        IntTerm::Sub(a, b) => IntTerm::sub(abstract_int(a, go), abstract_int(b, go)),
        other => other.clone(),
    }
}

fn abstract_seq(t: &SeqTerm, table: &mut Vec<(SeqTerm, String)>, names: &mut Names) -> SeqTerm {
    match t {
        SeqTerm::Var(_) | SeqTerm::Empty => t.clone(),
        SeqTerm::Int(i) => SeqTerm::int(abstract_int(i, &mut |s| abstract_seq(s, table, names))),
        SeqTerm::Concat(a, b) => {
            SeqTerm::concat(abstract_seq(a, table, names), abstract_seq(b, table, names))
        }
        SeqTerm::Sub(a, k1, k2) => SeqTerm::sub(abstract_seq(a, table, names), *k1, *k2),
        SeqTerm::Rev(a) => {
            let inner = abstract_seq(a, table, names);
            if let Some((_, q)) = table.iter().find(|(u, _)| *u == inner) {
                return SeqTerm::var(q);
            }
            let stem = match &inner {
                SeqTerm::Var(x) => format!("{x}_R"),
                _ => "r_R".into(),
            };
            let q = names.fresh(&stem);
            table.push((inner, q.clone()));
            SeqTerm::var(&q)
        }
    }
}

/// The solver query for a VC: reversal axioms applied, remaining reversals
/// abstracted. The flag is set when the query is weaker than the VC.
pub fn prepare(vc: &Vc) -> Option<(Formula, bool)> {
    let f = vc.formula.as_ref()?;
    let (f, abstracted) = abstract_reversals(&apply_reversal_axioms(f));
    Some((f, abstracted || matches!(vc.status, VcStatus::Weakened { .. })))
}

/// Checks one VC. A falsifiable weakened query yields `Unknown`, never
/// `Invalid`.
pub fn discharge(vc: &Vc, budget: &Budget, stats: &mut Stats) -> Result<Validity, SolveError> {
    let unknown = |cause| {
        Validity::Unknown(BudgetReport {
            nodes: 0,
            max_len: budget.witness_len,
            cause,
        })
    };
    match vc.status {
        VcStatus::ByAssumption => return Ok(Validity::Valid),
        VcStatus::Unencodable(_) => return Ok(unknown(UnknownCause::Unencodable)),
        _ => {}
    }
    let Some((f, weaker)) = prepare(vc) else {
        return Ok(unknown(UnknownCause::Unencodable));
    };
    let v = check_valid_stats(&f, budget, stats)?;
    Ok(match v {
        Validity::Invalid(_) if weaker => Validity::Unknown(BudgetReport {
            nodes: stats.nodes,
            max_len: budget.witness_len,
            cause: UnknownCause::Weakened,
        }),
        other => other,
    })
}

#[cfg(test)]
mod tests;
