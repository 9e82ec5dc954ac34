//! Removal of shorthands: constants, derived comparisons, bounded length
//! predicates, subsequences (and with them `first`/`last`), plus the
//! update axioms for reversal.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{print_seq, Atom, Formula, IntTerm, Matrix, Quant, Regex, Rel, SeqTerm};

/// `v(k1, k2)`: the subsequence selector on ground sequences, with
/// non-positive indices counting from the end.
pub fn subseq_eval(v: &[i64], k1: i64, k2: i64) -> Vec<i64> {
    let n = v.len() as i64;
    let slice = |from: i64, to: i64| v[(from - 1) as usize..to as usize].to_vec();
    if 1 <= k1 && k1 <= k2 && k2 <= n {
        slice(k1, k2)
    } else if k1 - n <= k2 && k2 < 1 && 1 <= k1 {
        // v(k1, |v| + k2); the guard makes it a case-1 selection
        slice(k1, n + k2)
    } else if 1 - n <= k1 && k1 <= k2 && k2 < 1 {
        slice(n + k1, n + k2)
    } else {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElaborationError {
    /// A reversal that the update axioms could not eliminate.
    ResidualReversal(String),
    MixedPrefix,
}

impl fmt::Display for ElaborationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElaborationError::ResidualReversal(t) => write!(
                f,
                "reversal `{t}` cannot be eliminated by the update axioms"
            ),
            ElaborationError::MixedPrefix => write!(f, "mixed quantifier prefix"),
        }
    }
}

impl core::error::Error for ElaborationError {}

/// A formula using only the core constructs: `=` on sequences, regular
/// membership, integer `==` and `<`, and boolean connectives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreFormula {
    formula: Formula,
    polarity: Quant,
}

impl CoreFormula {
    /// Accepts `f` if it is already core. `polarity` is the reading of the
    /// free and generated variables.
    pub fn new(f: Formula, polarity: Quant) -> Option<CoreFormula> {
        if non_core_construct(&f).is_some() || f.prefix.iter().any(|(q, _)| *q != polarity) {
            return None;
        }
        Some(CoreFormula {
            formula: f,
            polarity,
        })
    }

    pub(crate) fn from_parts(formula: Formula, polarity: Quant) -> CoreFormula {
        CoreFormula { formula, polarity }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn into_formula(self) -> Formula {
        self.formula
    }

    pub fn polarity(&self) -> Quant {
        self.polarity
    }
}

/// Reports the first non-core construct in `f`, if any.
pub fn non_core_construct(f: &Formula) -> Option<&'static str> {
    fn seq(t: &SeqTerm) -> Option<&'static str> {
        match t {
            SeqTerm::Var(_) | SeqTerm::Empty => None,
            SeqTerm::Int(i) => int(i),
            SeqTerm::Concat(a, b) => seq(a).or_else(|| seq(b)),
            SeqTerm::Sub(..) => Some("subsequence"),
            SeqTerm::Rev(_) => Some("reversal"),
        }
    }
    fn int(t: &IntTerm) -> Option<&'static str> {
        match t {
            IntTerm::Zero | IntTerm::One => None,
            IntTerm::Const(_) => Some("integer constant"),
            IntTerm::Seq(s) => seq(s),
            IntTerm::Add(a, b) | IntTerm::Sub(a, b) => int(a).or_else(|| int(b)),
        }
    }
    fn regex(r: &Regex) -> Option<&'static str> {
        match r {
            Regex::Set(_) => Some("finite set"),
            Regex::Eps | Regex::Lit(_) | Regex::AnyInt => None,
            Regex::Union(a, b) | Regex::Concat(a, b) => regex(a).or_else(|| regex(b)),
            Regex::Star(a) | Regex::Plus(a) | Regex::Power(a, _) => regex(a),
        }
    }
    let mut found = None;
    f.matrix.for_each_atom(&mut |a| {
        if found.is_some() {
            return;
        }
        found = match a {
            Atom::SeqEq(l, r) => seq(l).or_else(|| seq(r)),
            Atom::InRegex(s, r) => seq(s).or_else(|| regex(r)),
            Atom::IntCmp(rel, l, r) => {
                if !matches!(rel, Rel::Eq | Rel::Lt) {
                    Some("derived comparison")
                } else {
                    int(l).or_else(|| int(r))
                }
            }
            Atom::LenCmp(..) => Some("length predicate"),
        };
    });
    found
}

// ---------------------------------------------------------------------------
// Fresh names

/// Generator of `$`-prefixed names that avoids every name in use.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    used: BTreeSet<String>,
    counter: usize,
}

impl FreshNames {
    pub fn avoiding<'a, I: IntoIterator<Item = &'a String>>(names: I) -> FreshNames {
        FreshNames {
            used: names.into_iter().cloned().collect(),
            counter: 0,
        }
    }

    pub fn for_formula(f: &Formula) -> FreshNames {
        let mut used = f.matrix.vars();
        used.extend(f.bound_vars());
        FreshNames { used, counter: 0 }
    }

    /// A fresh `$<stem><n>` name.
    pub fn next(&mut self, stem: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("${stem}{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.into());
    }
}

// ---------------------------------------------------------------------------
// Reversal

/// Rewrites reversals with `rev(eps) = eps`, `rev(x) = x` for terms of
/// length at most one, `rev(u ++ x) = x ++ rev(u)` when `|x| <= 1`, and
/// `rev(u) = eps <=> u = eps`. Reversals no rule applies to are kept.
pub fn apply_reversal_axioms(f: &Formula) -> Formula {
    let matrix = f
        .matrix
        .map_atoms::<()>(&mut |a| Ok(Matrix::Atom(rev_atom(a))))
        .unwrap_or_else(|_| unreachable!());
    Formula {
        prefix: f.prefix.clone(),
        matrix,
    }
}

fn rev_atom(a: &Atom) -> Atom {
    match a {
        Atom::SeqEq(l, r) => {
            let l = rev_seq(l);
            let r = rev_seq(r);
            match (l, r) {
                (SeqTerm::Rev(u), SeqTerm::Empty) => Atom::SeqEq(*u, SeqTerm::Empty),
                (SeqTerm::Empty, SeqTerm::Rev(u)) => Atom::SeqEq(SeqTerm::Empty, *u),
                (l, r) => Atom::SeqEq(l, r),
            }
        }
        Atom::InRegex(s, r) => Atom::InRegex(rev_seq(s), r.clone()),
        Atom::IntCmp(rel, l, r) => Atom::IntCmp(*rel, rev_int(l), rev_int(r)),
        Atom::LenCmp(s, rel, k) => Atom::LenCmp(rev_seq(s), *rel, *k),
    }
}

fn rev_int(t: &IntTerm) -> IntTerm {
    match t {
        IntTerm::Seq(s) => IntTerm::seq(rev_seq(s)),
        IntTerm::Add(a, b) => IntTerm::add(rev_int(a), rev_int(b)),
        IntTerm::Sub(a, b) => IntTerm::sub(rev_int(a), rev_int(b)),
        other => other.clone(),
    }
}

fn rev_seq(t: &SeqTerm) -> SeqTerm {
    match t {
        SeqTerm::Var(_) | SeqTerm::Empty => t.clone(),
        SeqTerm::Int(i) => SeqTerm::int(rev_int(i)),
        SeqTerm::Concat(a, b) => SeqTerm::concat(rev_seq(a), rev_seq(b)),
        SeqTerm::Sub(a, k1, k2) => SeqTerm::sub(rev_seq(a), *k1, *k2),
        SeqTerm::Rev(inner) => reverse_of(rev_seq(inner)),
    }
}

fn at_most_one(t: &SeqTerm) -> bool {
    match t {
        SeqTerm::Empty | SeqTerm::Int(_) => true,
        SeqTerm::Sub(_, k1, k2) => k1 == k2,
        _ => false,
    }
}

fn concat_items(t: SeqTerm, out: &mut Vec<SeqTerm>) {
    match t {
        SeqTerm::Concat(a, b) => {
            concat_items(*a, out);
            concat_items(*b, out);
        }
        other => out.push(other),
    }
}

/// The reversal of an already rewritten term.
fn reverse_of(t: SeqTerm) -> SeqTerm {
    if at_most_one(&t) {
        return t;
    }
    let mut items = Vec::new();
    concat_items(t, &mut items);
    let mut peeled = Vec::new();
    while items.len() > 1 && at_most_one(items.last().unwrap()) {
        peeled.push(items.pop().unwrap());
    }
    let rest = rebuild_concat(items);
    let rest = if at_most_one(&rest) {
        rest
    } else {
        SeqTerm::rev(rest)
    };
    peeled.push(rest);
    rebuild_concat(peeled)
}

fn rebuild_concat(items: Vec<SeqTerm>) -> SeqTerm {
    let mut it = items.into_iter();
    let first = it.next().unwrap_or(SeqTerm::Empty);
    it.fold(first, SeqTerm::concat)
}

// ---------------------------------------------------------------------------
// Shorthand expansion

/// Expands every shorthand. Generated variables join the prefix; their
/// defining constraints guard the matrix (`defs => ψ` under a universal or
/// empty prefix, `defs & ψ` under an existential one).
pub fn expand_shorthands(f: &Formula) -> Result<CoreFormula, ElaborationError> {
    let q = f.quant().unwrap_or(Quant::Forall);
    expand_shorthands_as(f, q)
}

/// As [`expand_shorthands`] with an explicit polarity for the generated
/// variables; a quantifier-free `f` may be read either way.
pub fn expand_shorthands_as(f: &Formula, q: Quant) -> Result<CoreFormula, ElaborationError> {
    if f.prefix.iter().any(|(p, _)| *p != q) {
        return Err(ElaborationError::MixedPrefix);
    }
    let mut ex = Expander {
        fresh: FreshNames::for_formula(f),
        guards: Vec::new(),
        new_vars: Vec::new(),
        subs: BTreeMap::new(),
        consts: BTreeMap::new(),
    };
    let body = f.matrix.map_atoms(&mut |a| ex.atom(a))?;
    let mut prefix = f.prefix.clone();
    prefix.extend(ex.new_vars.iter().map(|v| (q, v.clone())));
    let guards = Matrix::and_all(ex.guards);
    let matrix = match (guards, q) {
        (Matrix::True, _) => body,
        (g, Quant::Forall) => Matrix::imp(g, body),
        (g, Quant::Exists) => Matrix::and(g, body),
    };
    Ok(CoreFormula::from_parts(Formula { prefix, matrix }, q))
}

struct Expander {
    fresh: FreshNames,
    guards: Vec<Matrix>,
    new_vars: Vec<String>,
    /// Shared expansion of identical subsequence terms.
    subs: BTreeMap<(String, i64, i64), String>,
    consts: BTreeMap<i64, String>,
}

impl Expander {
    fn fresh(&mut self, stem: &str) -> String {
        let v = self.fresh.next(stem);
        self.new_vars.push(v.clone());
        v
    }

    fn atom(&mut self, a: &Atom) -> Result<Matrix, ElaborationError> {
        Ok(match a {
            Atom::SeqEq(l, r) => Matrix::Atom(Atom::SeqEq(self.seq(l)?, self.seq(r)?)),
            Atom::InRegex(s, r) => Matrix::Atom(Atom::InRegex(self.seq(s)?, desugar_regex(r))),
            Atom::IntCmp(rel, l, r) => {
                let l = self.int(l)?;
                let r = self.int(r)?;
                let eq = || Matrix::Atom(Atom::IntCmp(Rel::Eq, l.clone(), r.clone()));
                let lt = || Matrix::Atom(Atom::IntCmp(Rel::Lt, l.clone(), r.clone()));
                let gt = || Matrix::Atom(Atom::IntCmp(Rel::Lt, r.clone(), l.clone()));
                match rel {
                    Rel::Eq => eq(),
                    Rel::Lt => lt(),
                    Rel::Ne => Matrix::not(eq()),
                    Rel::Le => Matrix::or(lt(), eq()),
                    Rel::Ge => Matrix::or(gt(), eq()),
                    Rel::Gt => gt(),
                }
            }
            Atom::LenCmp(s, rel, k) => {
                let s = self.seq(s)?;
                length_constraint(s, *rel, *k as i64)
            }
        })
    }

    fn seq(&mut self, t: &SeqTerm) -> Result<SeqTerm, ElaborationError> {
        Ok(match t {
            SeqTerm::Var(_) | SeqTerm::Empty => t.clone(),
            SeqTerm::Int(i) => match **i {
                IntTerm::Const(k) if k != 0 && k != 1 => SeqTerm::Var(self.constant(k)),
                _ => SeqTerm::int(self.int(i)?),
            },
            SeqTerm::Concat(a, b) => SeqTerm::concat(self.seq(a)?, self.seq(b)?),
            SeqTerm::Sub(base, k1, k2) => {
                let base = self.seq(base)?;
                let x = match base {
                    SeqTerm::Var(x) => x,
                    other => {
                        let z = self.fresh("z");
                        self.guards
                            .push(Matrix::Atom(Atom::SeqEq(SeqTerm::Var(z.clone()), other)));
                        z
                    }
                };
                SeqTerm::Var(self.subsequence(x, *k1, *k2))
            }
            SeqTerm::Rev(_) => return Err(ElaborationError::ResidualReversal(print_seq(t))),
        })
    }

    fn int(&mut self, t: &IntTerm) -> Result<IntTerm, ElaborationError> {
        Ok(match t {
            IntTerm::Zero | IntTerm::One => t.clone(),
            IntTerm::Const(0) => IntTerm::Zero,
            IntTerm::Const(1) => IntTerm::One,
            IntTerm::Const(k) => IntTerm::seq(SeqTerm::Var(self.constant(*k))),
            IntTerm::Seq(s) => IntTerm::seq(self.seq(s)?),
            IntTerm::Add(a, b) => IntTerm::add(self.int(a)?, self.int(b)?),
            IntTerm::Sub(a, b) => IntTerm::sub(self.int(a)?, self.int(b)?),
        })
    }

    /// A variable holding the singleton `[k]`.
    fn constant(&mut self, k: i64) -> String {
        if let Some(c) = self.consts.get(&k) {
            return c.clone();
        }
        let c = self.fresh("c");
        self.guards.push(Matrix::Atom(Atom::InRegex(
            SeqTerm::Var(c.clone()),
            Regex::Lit(k),
        )));
        self.consts.insert(k, c.clone());
        c
    }

    /// Introduces `u, v, w` with the subsequence case split and returns `v`.
    fn subsequence(&mut self, x: String, k1: i64, k2: i64) -> String {
        if let Some(v) = self.subs.get(&(x.clone(), k1, k2)) {
            return v.clone();
        }
        let u = self.fresh("u");
        let v = self.fresh("v");
        let w = self.fresh("w");
        let var = |s: &String| SeqTerm::Var(s.clone());
        let split = Matrix::Atom(Atom::SeqEq(
            var(&x),
            SeqTerm::concat(SeqTerm::concat(var(&u), var(&v)), var(&w)),
        ));
        let len_eq = |s: &String, n: i64| length_constraint(var(s), Rel::Eq, n);
        let at_least = |n: i64| length_constraint(var(&x), Rel::Ge, n);

        let mut cases: Vec<(Matrix, Matrix)> = Vec::new();
        // κ1: 1 <= k1 <= k2 <= |x|
        if 1 <= k1 && k1 <= k2 {
            cases.push((
                at_least(k2),
                Matrix::and_all([split.clone(), len_eq(&u, k1 - 1), len_eq(&v, k2 - k1 + 1)]),
            ));
        }
        // κ2: k1 - |x| <= k2 < 1 <= k1
        if k2 < 1 && 1 <= k1 {
            cases.push((
                at_least(k1 - k2),
                Matrix::and_all([split.clone(), len_eq(&u, k1 - 1), len_eq(&w, -k2)]),
            ));
        }
        // κ3: 1 - |x| <= k1 <= k2 < 1
        if k1 <= k2 && k2 < 1 {
            cases.push((
                at_least(1 - k1),
                Matrix::and_all([split.clone(), len_eq(&v, -k1 + k2 + 1), len_eq(&w, -k2)]),
            ));
        }
        let empty = |s: &String| Matrix::Atom(Atom::SeqEq(var(s), SeqTerm::Empty));
        let otherwise = Matrix::and_all([
            Matrix::not(Matrix::or_all(cases.iter().map(|(k, _)| k.clone()))),
            empty(&u),
            empty(&v),
            empty(&w),
        ]);
        let branches = cases
            .into_iter()
            .map(|(k, body)| Matrix::and(k, body))
            .chain(core::iter::once(otherwise));
        self.guards.push(Matrix::or_all(branches));
        self.subs.insert((x, k1, k2), v.clone());
        v
    }
}

/// `INT^n` with the degenerate powers simplified.
fn int_power(n: u32) -> Regex {
    match n {
        0 => Regex::Eps,
        1 => Regex::AnyInt,
        n => Regex::power(Regex::AnyInt, n),
    }
}

/// `len(s) rel k` as a regular constraint (or a constant).
fn length_constraint(s: SeqTerm, rel: Rel, k: i64) -> Matrix {
    let member = |r: Regex| Matrix::Atom(Atom::InRegex(s.clone(), r));
    let less_than = |k: i64| {
        if k <= 0 {
            Matrix::False
        } else {
            member(
                (1..k as u32)
                    .map(int_power)
                    .fold(Regex::Eps, Regex::union),
            )
        }
    };
    let at_least = |k: i64| {
        if k <= 0 {
            Matrix::True
        } else {
            member(Regex::concat(int_power(k as u32), Regex::star(Regex::AnyInt)))
        }
    };
    let exactly = |k: i64| {
        if k < 0 {
            Matrix::False
        } else {
            member(int_power(k as u32))
        }
    };
    match rel {
        Rel::Lt => less_than(k),
        Rel::Le => less_than(k + 1),
        Rel::Eq => exactly(k),
        Rel::Ne => Matrix::not(exactly(k)),
        Rel::Gt => at_least(k + 1),
        Rel::Ge => at_least(k),
    }
}

fn desugar_regex(r: &Regex) -> Regex {
    match r {
        Regex::Set(items) => {
            let mut it = items.iter().map(|k| Regex::Lit(*k));
            let first = it.next().unwrap_or(Regex::Eps);
            it.fold(first, Regex::union)
        }
        Regex::Eps | Regex::Lit(_) | Regex::AnyInt => r.clone(),
        Regex::Union(a, b) => Regex::union(desugar_regex(a), desugar_regex(b)),
        Regex::Concat(a, b) => Regex::concat(desugar_regex(a), desugar_regex(b)),
        Regex::Star(a) => Regex::Star(Box::new(desugar_regex(a))),
        Regex::Plus(a) => Regex::Plus(Box::new(desugar_regex(a))),
        Regex::Power(a, n) => Regex::Power(Box::new(desugar_regex(a)), *n),
    }
}

#[cfg(test)]
mod tests;
