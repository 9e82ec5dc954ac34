//! Negation normal form, lazy clause enumeration and disequation removal.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::automata::{Dfa, WordRegex, LETTERS};
use crate::elaborate::FreshNames;
use crate::encode::{Sym, Word, WordAtom, WordFormula};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Literal {
    Eq(Word, Word),
    Ne(Word, Word),
    In(String, Dfa),
}

impl Literal {
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Literal::Eq(l, r) | Literal::Ne(l, r) => {
                for s in l.iter().chain(r) {
                    if let Sym::Var(x) = s {
                        out.insert(x.clone());
                    }
                }
            }
            Literal::In(x, _) => {
                out.insert(x.clone());
            }
        }
    }
}

/// A conjunction of literals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in &self.literals {
            l.vars(&mut out);
        }
        out
    }

    pub fn has_disequations(&self) -> bool {
        self.literals.iter().any(|l| matches!(l, Literal::Ne(..)))
    }

    /// Ground truth under a total assignment of words.
    pub fn holds(&self, env: &BTreeMap<String, Vec<u8>>) -> Option<bool> {
        let word = |w: &Word| -> Option<Vec<u8>> {
            let mut out = Vec::new();
            for s in w {
                match s {
                    Sym::Letter(l) => out.push(*l),
                    Sym::Var(x) => out.extend(env.get(x)?),
                }
            }
            Some(out)
        };
        for l in &self.literals {
            let ok = match l {
                Literal::Eq(a, b) => word(a)? == word(b)?,
                Literal::Ne(a, b) => word(a)? != word(b)?,
                Literal::In(x, d) => d.accepts(env.get(x)?),
            };
            if !ok {
                return Some(false);
            }
        }
        Some(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Nnf {
    True,
    False,
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn and(items: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for i in items {
        match i {
            Nnf::True => {}
            Nnf::False => return Nnf::False,
            Nnf::And(xs) => out.extend(xs),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::True,
        1 => out.pop().unwrap(),
        _ => Nnf::And(out),
    }
}

fn or(items: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for i in items {
        match i {
            Nnf::False => {}
            Nnf::True => return Nnf::True,
            Nnf::Or(xs) => out.extend(xs),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Nnf::False,
        1 => out.pop().unwrap(),
        _ => Nnf::Or(out),
    }
}

pub(crate) fn to_nnf(f: &WordFormula, positive: bool) -> Nnf {
    match f {
        WordFormula::True => if positive { Nnf::True } else { Nnf::False },
        WordFormula::False => if positive { Nnf::False } else { Nnf::True },
        WordFormula::Atom(WordAtom::Eq(l, r)) => {
            if l == r {
                return to_nnf(&WordFormula::True, positive);
            }
            Nnf::Lit(if positive {
                Literal::Eq(l.clone(), r.clone())
            } else {
                Literal::Ne(l.clone(), r.clone())
            })
        }
        WordFormula::Atom(WordAtom::In(x, d)) => {
            let d = if positive { d.clone() } else { d.complement() };
            if d.is_universal() {
                Nnf::True
            } else if d.is_empty() {
                Nnf::False
            } else {
                Nnf::Lit(Literal::In(x.clone(), d))
            }
        }
        WordFormula::Not(a) => to_nnf(a, !positive),
        WordFormula::And(xs) => {
            let items = xs.iter().map(|x| to_nnf(x, positive)).collect();
            if positive { and(items) } else { or(items) }
        }
        WordFormula::Or(xs) => {
            let items = xs.iter().map(|x| to_nnf(x, positive)).collect();
            if positive { or(items) } else { and(items) }
        }
        WordFormula::Imp(a, b) => {
            if positive {
                or(vec![to_nnf(a, false), to_nnf(b, true)])
            } else {
                and(vec![to_nnf(a, true), to_nnf(b, false)])
            }
        }
        WordFormula::Iff(a, b) => {
            let (pa, na, pb, nb) = (to_nnf(a, true), to_nnf(a, false), to_nnf(b, true), to_nnf(b, false));
            if positive {
                or(vec![and(vec![pa, pb]), and(vec![na, nb])])
            } else {
                or(vec![and(vec![pa, nb]), and(vec![na, pb])])
            }
        }
    }
}

/// Raised when the clause budget is exhausted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClauseCapExceeded {
    pub cap: usize,
}

const WALK_FACTOR: usize = 4;

/// `f` is false under the memberships collected so far.
fn conflicts(f: &Nnf, langs: &BTreeMap<String, Dfa>) -> bool {
    match f {
        Nnf::False => true,
        Nnf::Lit(Literal::In(x, d)) => match langs.get(x) {
            Some(o) => o.intersect(d).is_empty(),
            None => d.is_empty(),
        },
        Nnf::Lit(Literal::Ne(a, b)) => a == b,
        Nnf::And(xs) => xs.iter().any(|x| conflicts(x, langs)),
        _ => false,
    }
}

/// Depth-first enumeration of the clauses of `f`, visiting conjunctive
/// parts before splitting disjunctions and skipping partial clauses whose
/// memberships already conflict. Before each split, `refute` may reject the
/// literals collected so far, discarding every clause that extends them.
/// Partial clauses count too: at most `WALK_FACTOR * cap` steps are taken.
pub(crate) fn for_each_clause(
    f: &Nnf,
    cap: usize,
    refute: &mut dyn FnMut(&[Literal]) -> bool,
    visit: &mut dyn FnMut(Clause) -> ControlFlow<()>,
) -> Result<ControlFlow<()>, ClauseCapExceeded> {
    struct Walk<'a> {
        cap: usize,
        count: usize,
        steps: usize,
        refute: &'a mut dyn FnMut(&[Literal]) -> bool,
        visit: &'a mut dyn FnMut(Clause) -> ControlFlow<()>,
    }
    impl Walk<'_> {
        fn go<'n>(
            &mut self,
            mut plain: Vec<&'n Nnf>,
            mut ors: Vec<&'n Nnf>,
            lits: &mut Vec<Literal>,
            langs: &mut BTreeMap<String, Dfa>,
        ) -> Result<ControlFlow<()>, ClauseCapExceeded> {
            self.steps += 1;
            if self.steps > self.cap.saturating_mul(WALK_FACTOR) {
                return Err(ClauseCapExceeded { cap: self.cap });
            }
            let mark = lits.len();
            let mut undo: Vec<(String, Option<Dfa>)> = Vec::new();
            let mut dead = false;
            while let Some(item) = plain.pop() {
                match item {
                    Nnf::True => {}
                    Nnf::False => {
                        dead = true;
                        break;
                    }
                    Nnf::And(xs) => plain.extend(xs.iter().rev()),
                    Nnf::Or(_) => ors.push(item),
                    Nnf::Lit(l) => {
                        if let Literal::In(x, d) = l {
                            let old = langs.get(x).cloned();
                            let new = match &old {
                                Some(o) => o.intersect(d),
                                None => d.clone(),
                            };
                            undo.push((x.clone(), old));
                            let empty = new.is_empty();
                            langs.insert(x.clone(), new);
                            if empty {
                                dead = true;
                                break;
                            }
                        }
                        if let Literal::Ne(a, b) = l {
                            if a == b {
                                dead = true;
                                break;
                            }
                        }
                        lits.push(l.clone());
                    }
                }
            }
            if !dead && !ors.is_empty() && lits.len() > mark {
                dead = (self.refute)(lits);
            }
            let out = if dead {
                Ok(ControlFlow::Continue(()))
            } else if ors.is_empty() {
                self.count += 1;
                if self.count > self.cap {
                    Err(ClauseCapExceeded { cap: self.cap })
                } else {
                    Ok((self.visit)(Clause {
                        literals: lits.clone(),
                    }))
                }
            } else {
                // split the disjunction with the fewest children still alive
                let alive = |o: &'n Nnf| -> Vec<&'n Nnf> {
                    let Nnf::Or(children) = o else { unreachable!() };
                    children.iter().filter(|c| !conflicts(c, langs)).collect()
                };
                let mut best: Option<(usize, Vec<&'n Nnf>)> = None;
                for (k, o) in ors.iter().enumerate() {
                    let live = alive(o);
                    if best.as_ref().map_or(true, |(_, b)| live.len() < b.len()) {
                        let done = live.len() <= 1;
                        best = Some((k, live));
                        if done {
                            break;
                        }
                    }
                }
                let (k, children) = best.unwrap();
                ors.remove(k);
                let mut flow = Ok(ControlFlow::Continue(()));
                for c in children {
                    flow = self.go(vec![c], ors.clone(), lits, langs);
                    if !matches!(flow, Ok(ControlFlow::Continue(()))) {
                        break;
                    }
                }
                flow
            };
            lits.truncate(mark);
            for (x, old) in undo.into_iter().rev() {
                match old {
                    Some(d) => langs.insert(x, d),
                    None => langs.remove(&x),
                };
            }
            out
        }
    }
    let mut walk = Walk {
        cap,
        count: 0,
        steps: 0,
        refute,
        visit,
    };
    walk.go(vec![f], Vec::new(), &mut Vec::new(), &mut BTreeMap::new())
}

/// The clauses of a disjunctive normal form of `f`.
pub fn nnf_dnf(f: &WordFormula, cap: usize) -> Result<Vec<Clause>, ClauseCapExceeded> {
    let mut out = Vec::new();
    let _ = for_each_clause(&to_nnf(f, true), cap, &mut |_| false, &mut |c| {
        out.push(c);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

fn strip_common(a: &mut Word, b: &mut Word) {
    let pre = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
    a.drain(..pre);
    b.drain(..pre);
    let suf = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    a.truncate(a.len() - suf);
    b.truncate(b.len() - suf);
}

fn ground(w: &Word) -> Option<Vec<u8>> {
    w.iter()
        .map(|s| match s {
            Sym::Letter(l) => Some(*l),
            Sym::Var(_) => None,
        })
        .collect()
}

/// Alternatives (each a conjunction) equivalent to `u != v`.
fn disequation_cases(u: &Word, v: &Word, fresh: &mut FreshNames) -> Vec<Vec<Literal>> {
    let (mut u, mut v) = (u.clone(), v.clone());
    strip_common(&mut u, &mut v);
    if u == v {
        return Vec::new();
    }
    if let (Some(a), Some(b)) = (ground(&u), ground(&v)) {
        return if a != b { vec![Vec::new()] } else { Vec::new() };
    }
    let sigma_plus = WordRegex::plus(WordRegex::Union(
        LETTERS.iter().map(|&l| WordRegex::Letter(l)).collect(),
    ))
    .to_dfa();
    for (x, y) in [(&u, &v), (&v, &u)] {
        if y.is_empty() {
            // x is nonempty: some variable of x is, unless x has a letter
            if x.iter().any(|s| matches!(s, Sym::Letter(_))) {
                return vec![Vec::new()];
            }
            return x
                .iter()
                .filter_map(|s| match s {
                    Sym::Var(z) => Some(vec![Literal::In(z.clone(), sigma_plus.clone())]),
                    Sym::Letter(_) => None,
                })
                .collect();
        }
        if let ([Sym::Var(z)], Some(w)) = (x.as_slice(), ground(y)) {
            return vec![vec![Literal::In(z.clone(), Dfa::word(&w).complement())]];
        }
    }
    // a common prefix followed by a first difference, or one side a
    // proper prefix of the other
    let mut cases = Vec::new();
    let sym = |x: &String| Sym::Var(x.clone());
    for alpha in LETTERS {
        let p = fresh.next("dp");
        let s1 = fresh.next("ds");
        let s2 = fresh.next("ds");
        let mut lhs = vec![sym(&p), Sym::Letter(alpha), sym(&s1)];
        let rhs = vec![sym(&p), sym(&s2)];
        let not_alpha = WordRegex::Concat(vec![
            WordRegex::Union(
                LETTERS
                    .iter()
                    .filter(|&&l| l != alpha)
                    .map(|&l| WordRegex::Letter(l))
                    .collect(),
            ),
            WordRegex::star(WordRegex::Union(
                LETTERS.iter().map(|&l| WordRegex::Letter(l)).collect(),
            )),
        ])
        .to_dfa();
        cases.push(vec![
            Literal::Eq(u.clone(), core::mem::take(&mut lhs)),
            Literal::Eq(v.clone(), rhs),
            Literal::In(s2, not_alpha),
        ]);
    }
    for (x, y) in [(&u, &v), (&v, &u)] {
        let s = fresh.next("ds");
        let mut longer = y.clone();
        longer.push(sym(&s));
        cases.push(vec![
            Literal::Eq(x.clone(), longer),
            Literal::In(s, sigma_plus.clone()),
        ]);
    }
    cases
}

/// Replaces every disequation by a disjunction of equation systems; the
/// result is the list of disequation-free clauses.
pub fn eliminate_disequations(clause: &Clause) -> Vec<Clause> {
    let mut out = Vec::new();
    let _ = for_each_diseq_free(clause, &mut |c| {
        out.push(c);
        ControlFlow::Continue(())
    });
    out
}

/// Lazy form of [`eliminate_disequations`].
pub(crate) fn for_each_diseq_free(
    clause: &Clause,
    visit: &mut dyn FnMut(Clause) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let mut fresh = FreshNames::avoiding(&clause.vars());
    let mut base = Vec::new();
    let mut alternatives = Vec::new();
    for l in &clause.literals {
        match l {
            Literal::Ne(u, v) => {
                let cases = disequation_cases(u, v, &mut fresh);
                match cases.len() {
                    0 => return ControlFlow::Continue(()),
                    1 => base.extend(cases.into_iter().next().unwrap()),
                    _ => alternatives.push(cases),
                }
            }
            other => base.push(other.clone()),
        }
    }
    fn product(
        base: &mut Vec<Literal>,
        alternatives: &[Vec<Vec<Literal>>],
        visit: &mut dyn FnMut(Clause) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        match alternatives.split_first() {
            None => visit(Clause {
                literals: base.clone(),
            }),
            Some((cases, rest)) => {
                for case in cases {
                    let mark = base.len();
                    base.extend(case.iter().cloned());
                    let flow = product(base, rest, visit);
                    base.truncate(mark);
                    flow?;
                }
                ControlFlow::Continue(())
            }
        }
    }
    product(&mut base, &alternatives, visit)
}
