//! Ground-truth evaluation of formulas under explicit assignments, and
//! bounded brute-force satisfiability.
//!
//! Nothing here goes through the word encoding: regular expressions are
//! matched directly over integers, subsequences are computed with
//! [`subseq_eval`], and quantifiers are expanded by enumeration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::elaborate::subseq_eval;
use crate::syntax::{free_vars, Atom, Formula, IntTerm, Matrix, Quant, Regex, SeqTerm};

/// A ground integer sequence.
pub type Seq = Vec<i64>;

pub type Assignment = BTreeMap<String, Seq>;

/// Search space for enumeration: sequences of length at most `max_len`
/// whose elements lie in `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_len: usize,
    pub lo: i64,
    pub hi: i64,
}

impl Bounds {
    pub fn new(max_len: usize, lo: i64, hi: i64) -> Result<Bounds, OracleError> {
        if lo > hi {
            return Err(OracleError::EmptyRange { lo, hi });
        }
        Ok(Bounds { max_len, lo, hi })
    }

    /// Every sequence in the bounds, by ascending length and then
    /// lexicographically by value.
    pub fn sequences(&self) -> Vec<Seq> {
        let mut out: Vec<Seq> = alloc::vec![Vec::new()];
        let mut layer: Vec<Seq> = alloc::vec![Vec::new()];
        for _ in 0..self.max_len {
            let mut next = Vec::new();
            for s in &layer {
                for k in self.lo..=self.hi {
                    let mut t = s.clone();
                    t.push(k);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    UnboundVariable(String),
    EmptyRange { lo: i64, hi: i64 },
    /// A quantified formula was evaluated without enumeration bounds.
    NeedsBounds,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::UnboundVariable(v) => write!(f, "variable `{v}` has no value"),
            OracleError::EmptyRange { lo, hi } => write!(f, "empty value range {lo}..={hi}"),
            OracleError::NeedsBounds => {
                write!(f, "quantified formulas need enumeration bounds")
            }
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteResult {
    Sat(Assignment),
    NoModelWithinBounds,
}

/// Truth value of `f` under `env`. Quantified variables are enumerated
/// within `bounds`, so for prefixed formulas the answer is exact only
/// relative to those bounds.
pub fn eval(f: &Formula, env: &Assignment, bounds: Option<&Bounds>) -> Result<bool, OracleError> {
    if f.prefix.is_empty() {
        return eval_matrix(&f.matrix, env);
    }
    let bounds = bounds.ok_or(OracleError::NeedsBounds)?;
    eval_in(f, env, &bounds.sequences())
}

/// Like [`eval`], with the quantified variables ranging over `domain`.
pub fn eval_in(f: &Formula, env: &Assignment, domain: &[Seq]) -> Result<bool, OracleError> {
    if f.prefix.is_empty() {
        return eval_matrix(&f.matrix, env);
    }
    let quant = f.prefix[0].0;
    let mut vars: Vec<&str> = Vec::new();
    for (_, v) in &f.prefix {
        if !vars.contains(&v.as_str()) {
            vars.push(v);
        }
    }
    let mut local = env.clone();
    let mut result = None;
    odometer(vars.len(), domain.len(), |idx| {
        for (v, &i) in vars.iter().zip(idx) {
            local.insert(String::from(*v), domain[i].clone());
        }
        match eval_matrix(&f.matrix, &local) {
            Err(e) => {
                result = Some(Err(e));
                false
            }
            Ok(val) => match (quant, val) {
                (Quant::Forall, false) => {
                    result = Some(Ok(false));
                    false
                }
                (Quant::Exists, true) => {
                    result = Some(Ok(true));
                    false
                }
                _ => true,
            },
        }
    });
    result.unwrap_or(Ok(quant == Quant::Forall))
}

/// Returns the first assignment of the free variables (in sorted name
/// order, each enumerated as in [`Bounds::sequences`], first variable most
/// significant) under which `f` holds.
pub fn brute_force_sat(f: &Formula, bounds: &Bounds) -> Result<BruteResult, OracleError> {
    let vars: Vec<String> = free_vars(f).into_iter().collect();
    let domain = bounds.sequences();
    let mut env = Assignment::new();
    let mut found = None;
    let mut error = None;
    odometer(vars.len(), domain.len(), |idx| {
        for (v, &i) in vars.iter().zip(idx) {
            env.insert(v.clone(), domain[i].clone());
        }
        match eval(f, &env, Some(bounds)) {
            Ok(true) => {
                found = Some(env.clone());
                false
            }
            Ok(false) => true,
            Err(e) => {
                error = Some(e);
                false
            }
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    Ok(match found {
        Some(a) => BruteResult::Sat(a),
        None => BruteResult::NoModelWithinBounds,
    })
}

/// Visits all index vectors of length `n` over `0..base` in lexicographic
/// order until `visit` returns false.
fn odometer(n: usize, base: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if base == 0 && n > 0 {
        return;
    }
    let mut idx = alloc::vec![0usize; n];
    loop {
        if !visit(&idx) {
            return;
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < base {
                break;
            }
            idx[pos] = 0;
        }
    }
}

pub fn eval_matrix(m: &Matrix, env: &Assignment) -> Result<bool, OracleError> {
    Ok(match m {
        Matrix::True => true,
        Matrix::False => false,
        Matrix::Atom(a) => eval_atom(a, env)?,
        Matrix::Not(a) => !eval_matrix(a, env)?,
        Matrix::And(a, b) => eval_matrix(a, env)? && eval_matrix(b, env)?,
        Matrix::Or(a, b) => eval_matrix(a, env)? || eval_matrix(b, env)?,
        Matrix::Imp(a, b) => !eval_matrix(a, env)? || eval_matrix(b, env)?,
        Matrix::Iff(a, b) => eval_matrix(a, env)? == eval_matrix(b, env)?,
    })
}

pub fn eval_atom(a: &Atom, env: &Assignment) -> Result<bool, OracleError> {
    Ok(match a {
        Atom::SeqEq(l, r) => eval_seq(l, env)? == eval_seq(r, env)?,
        Atom::InRegex(s, r) => regex_matches(r, &eval_seq(s, env)?),
        Atom::IntCmp(rel, l, r) => rel.holds(eval_int(l, env)?, eval_int(r, env)?),
        Atom::LenCmp(s, rel, k) => rel.holds(eval_seq(s, env)?.len() as i128, *k as i128),
    })
}

pub fn eval_seq(t: &SeqTerm, env: &Assignment) -> Result<Seq, OracleError> {
    Ok(match t {
        SeqTerm::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| OracleError::UnboundVariable(v.clone()))?,
        SeqTerm::Empty => Vec::new(),
        SeqTerm::Int(i) => alloc::vec![eval_int(i, env)? as i64],
        SeqTerm::Concat(a, b) => {
            let mut out = eval_seq(a, env)?;
            out.extend(eval_seq(b, env)?);
            out
        }
        SeqTerm::Sub(a, k1, k2) => subseq_eval(&eval_seq(a, env)?, *k1, *k2),
        SeqTerm::Rev(a) => {
            let mut out = eval_seq(a, env)?;
            out.reverse();
            out
        }
    })
}

pub fn eval_int(t: &IntTerm, env: &Assignment) -> Result<i128, OracleError> {
    Ok(match t {
        IntTerm::Zero => 0,
        IntTerm::One => 1,
        IntTerm::Const(k) => *k as i128,
        IntTerm::Seq(s) => eval_seq(s, env)?.first().copied().unwrap_or(0) as i128,
        IntTerm::Add(a, b) => eval_int(a, env)? + eval_int(b, env)?,
        IntTerm::Sub(a, b) => eval_int(a, env)? - eval_int(b, env)?,
    })
}

/// Whole-sequence match of an integer regular expression.
pub fn regex_matches(r: &Regex, s: &[i64]) -> bool {
    let mut start = BTreeSet::new();
    start.insert(0);
    ends(r, s, &start).contains(&s.len())
}

/// Positions reachable after matching `r` from any position in `from`.
fn ends(r: &Regex, s: &[i64], from: &BTreeSet<usize>) -> BTreeSet<usize> {
    match r {
        Regex::Eps => from.clone(),
        Regex::Lit(k) => from
            .iter()
            .filter(|&&i| s.get(i) == Some(k))
            .map(|i| i + 1)
            .collect(),
        Regex::AnyInt => from.iter().filter(|&&i| i < s.len()).map(|i| i + 1).collect(),
        Regex::Set(items) => from
            .iter()
            .filter(|&&i| s.get(i).is_some_and(|x| items.contains(x)))
            .map(|i| i + 1)
            .collect(),
        Regex::Union(a, b) => {
            let mut out = ends(a, s, from);
            out.extend(ends(b, s, from));
            out
        }
        Regex::Concat(a, b) => ends(b, s, &ends(a, s, from)),
        Regex::Star(a) => {
            let mut reached = from.clone();
            let mut frontier = from.clone();
            while !frontier.is_empty() {
                let next: BTreeSet<usize> = ends(a, s, &frontier)
                    .into_iter()
                    .filter(|i| !reached.contains(i))
                    .collect();
                reached.extend(next.iter().copied());
                frontier = next;
            }
            reached
        }
        Regex::Plus(a) => {
            let once = ends(a, s, from);
            ends(&Regex::Star(a.clone()), s, &once)
        }
        Regex::Power(a, n) => {
            let mut cur = from.clone();
            for _ in 0..*n {
                cur = ends(a, s, &cur);
            }
            cur
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn env(pairs: &[(&str, &[i64])]) -> Assignment {
        pairs
            .iter()
            .map(|(k, v)| (String::from(*k), v.to_vec()))
            .collect()
    }

    #[test]
    fn first_element_semantics() {
        let f = parse_formula("u <= v").unwrap();
        assert!(eval(&f, &env(&[("u", &[3]), ("v", &[5])]), None).unwrap());
        let f = parse_formula("u == 0").unwrap();
        assert!(eval(&f, &env(&[("u", &[])]), None).unwrap());
    }

    #[test]
    fn periodicity_truth_table() {
        let f = parse_formula(
            "forall h,t . u = h ++ t & len(t) > 0 => (last(h) == 1 => t == 0) & (last(h) == 0 => t == 1)",
        )
        .unwrap();
        let b = Bounds::new(3, 0, 1).unwrap();
        assert!(!eval(&f, &env(&[("u", &[0, 1, 0])]), Some(&b)).unwrap());
        assert!(eval(&f, &env(&[("u", &[1, 0, 1])]), Some(&b)).unwrap());
    }

    #[test]
    fn unbound_variable() {
        let f = parse_formula("x = y").unwrap();
        assert_eq!(
            eval(&f, &env(&[("x", &[])]), None),
            Err(OracleError::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn brute_force_examples() {
        let b = Bounds::new(2, -2, 2).unwrap();
        let f = parse_formula("x = x ++ 1").unwrap();
        assert_eq!(brute_force_sat(&f, &b).unwrap(), BruteResult::NoModelWithinBounds);
        let f = parse_formula("first(x) == 1 & len(x) = 1").unwrap();
        assert_eq!(
            brute_force_sat(&f, &b).unwrap(),
            BruteResult::Sat(env(&[("x", &[1])]))
        );
    }

    #[test]
    fn comparison_example_models() {
        let f = parse_formula(
            "forall h,t,v . u == 1 + 3 & (u = h ++ t & len(h) > 0 & len(t) > 0 & last(h) == v => t == v + 1)",
        )
        .unwrap();
        let b = Bounds::new(3, 1, 6).unwrap();
        assert!(eval(&f, &env(&[("u", &[4, 5, 6])]), Some(&b)).unwrap());
        assert!(!eval(&f, &env(&[("u", &[4, 6])]), Some(&b)).unwrap());
        // shortest model in enumeration order
        assert_eq!(
            brute_force_sat(&f, &b).unwrap(),
            BruteResult::Sat(env(&[("u", &[4])]))
        );
    }

    #[test]
    fn regex_matching() {
        let r = |t: &str| match parse_formula(&alloc::format!("x in {t}")).unwrap().matrix {
            Matrix::Atom(Atom::InRegex(_, r)) => r,
            _ => unreachable!(),
        };
        assert!(regex_matches(&r("(INT* 7 INT*)"), &[3, 7, 2]));
        assert!(!regex_matches(&r("(INT* 7 INT*)"), &[3, 2]));
        assert!(regex_matches(&r("(eps | INT)"), &[]));
        assert!(regex_matches(&r("INT^2"), &[1, 1]));
        assert!(!regex_matches(&r("INT^2"), &[1]));
        assert!(regex_matches(&r("{1, -2}+"), &[1, -2, 1]));
        assert!(!regex_matches(&r("{1, -2}+"), &[]));
    }

    #[test]
    fn enumeration_order() {
        let b = Bounds::new(2, 0, 1).unwrap();
        let seqs = b.sequences();
        assert_eq!(seqs.len(), 7);
        assert_eq!(seqs[0], Vec::<i64>::new());
        assert_eq!(seqs[1], alloc::vec![0]);
        assert_eq!(seqs[3], alloc::vec![0, 0]);
        assert_eq!(seqs[6], alloc::vec![1, 1]);
    }
}
