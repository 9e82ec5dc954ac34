//! Satisfiability of word problems, and through the encoding, of formulas.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;

mod dnf;
mod nielsen;

pub use dnf::{eliminate_disequations, nnf_dnf, Clause, ClauseCapExceeded, Literal};
pub use nielsen::{solve_clause, solve_clause_stats, SearchStats};

use crate::automata::Letter;
use crate::encode::{encode_as, EncodeError, FrameStyle, WordProblem};
use crate::oracle::{self, Assignment};
use crate::syntax::{Formula, Matrix, Quant};

/// Search limits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Nodes expanded per clause.
    pub nodes: usize,
    /// Letters peeled off along one search path.
    pub witness_len: usize,
    pub clause_cap: usize,
    /// Try Nielsen alternatives in reverse order.
    pub reverse_branches: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nodes: 200_000,
            witness_len: 64,
            clause_cap: 4096,
            reverse_branches: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub words: BTreeMap<String, Vec<Letter>>,
    /// The words that decode to integer sequences.
    pub decoded: BTreeMap<String, Vec<i64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnsatReason {
    Exhausted,
    LengthInfeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownCause {
    NodeBudget,
    LengthCap,
    ClauseCap,
    /// A candidate model failed the ground check.
    WitnessRejected,
    /// The query was weakened and the weakened form is falsifiable.
    Weakened,
    /// The query lies outside the universal fragment.
    Unencodable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetReport {
    pub nodes: usize,
    pub max_len: usize,
    pub cause: UnknownCause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverResult {
    Sat(Witness),
    Unsat(UnsatReason),
    Unknown(BudgetReport),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// A falsifying assignment of the source variables.
    Invalid(Assignment),
    Unknown(BudgetReport),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveError {
    Encode(EncodeError),
    /// `check_sat` needs an existential or empty prefix, `check_valid` a
    /// universal or empty one.
    WrongPrefix(Quant),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Encode(e) => e.fmt(f),
            SolveError::WrongPrefix(q) => write!(f, "unexpected `{}` prefix", q.keyword()),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<EncodeError> for SolveError {
    fn from(e: EncodeError) -> Self {
        SolveError::Encode(e)
    }
}

/// Totals over one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: usize,
    pub clauses: usize,
    pub largest: usize,
}

/// Solves an existential word problem clause by clause.
/// Node budget of the first pass over the clauses. Clauses it leaves open are
/// retried with the full budget once every clause has had a first pass.
const FIRST_PASS: usize = 2000;

pub fn solve_problem(wp: &WordProblem, budget: &Budget, stats: &mut Stats) -> SolverResult {
    debug_assert_eq!(wp.polarity, Quant::Exists);
    let nnf = dnf::to_nnf(&wp.matrix, true);
    let mut found = None;
    let mut unknown = None;
    let mut clauses = 0;
    let search = core::cell::RefCell::new(SearchStats::default());
    let mut refute = |lits: &[Literal]| nielsen::refutes(lits, budget, &mut search.borrow_mut());
    let quick = Budget {
        nodes: budget.nodes.min(FIRST_PASS),
        ..budget.clone()
    };
    let mut deferred = Vec::new();
    let capped = dnf::for_each_clause(&nnf, budget.clause_cap, &mut refute, &mut |c| {
        clauses += 1;
        match nielsen::solve_clause_stats(&c, &quick, &mut search.borrow_mut()) {
            SolverResult::Sat(w) => {
                found = Some(w);
                ControlFlow::Break(())
            }
            SolverResult::Unknown(r) if r.cause == UnknownCause::NodeBudget && quick.nodes < budget.nodes => {
                deferred.push(c);
                ControlFlow::Continue(())
            }
            SolverResult::Unknown(r) => {
                unknown = Some(r);
                ControlFlow::Continue(())
            }
            SolverResult::Unsat(_) => ControlFlow::Continue(()),
        }
    });
    if found.is_none() {
        for c in &deferred {
            match nielsen::solve_clause_stats(c, budget, &mut search.borrow_mut()) {
                SolverResult::Sat(w) => {
                    found = Some(w);
                    break;
                }
                SolverResult::Unknown(r) => unknown = Some(r),
                SolverResult::Unsat(_) => {}
            }
        }
    }
    let search = search.into_inner();
    stats.nodes += search.nodes;
    stats.largest = stats.largest.max(search.largest);
    stats.clauses += clauses;
    if let Some(w) = found {
        return SolverResult::Sat(w);
    }
    if capped.is_err() {
        return SolverResult::Unknown(BudgetReport {
            nodes: search.nodes,
            max_len: budget.witness_len,
            cause: UnknownCause::ClauseCap,
        });
    }
    match unknown {
        Some(r) => SolverResult::Unknown(r),
        None => SolverResult::Unsat(UnsatReason::Exhausted),
    }
}

/// Satisfiability of a quantifier-free or existential formula.
pub fn check_sat(f: &Formula, budget: &Budget) -> Result<SolverResult, SolveError> {
    check_sat_stats(f, budget, &mut Stats::default())
}

pub fn check_sat_stats(
    f: &Formula,
    budget: &Budget,
    stats: &mut Stats,
) -> Result<SolverResult, SolveError> {
    if let Some(Quant::Forall) = f.quant() {
        return Err(SolveError::WrongPrefix(Quant::Forall));
    }
    let wp = encode_as(f, Quant::Exists, FrameStyle::Compact)?;
    let result = solve_problem(&wp, budget, stats);
    if let SolverResult::Sat(w) = &result {
        // the model must satisfy the source formula itself
        let env: Assignment = wp
            .source_vars
            .iter()
            .map(|x| (x.clone(), w.decoded.get(x).cloned().unwrap_or_default()))
            .collect();
        let body = Formula::quantifier_free(f.matrix.clone());
        if oracle::eval(&body, &env, None) != Ok(true) {
            return Ok(SolverResult::Unknown(BudgetReport {
                nodes: stats.nodes,
                max_len: budget.witness_len,
                cause: UnknownCause::WitnessRejected,
            }));
        }
        let mut w = w.clone();
        w.decoded = env;
        return Ok(SolverResult::Sat(w));
    }
    Ok(result)
}

/// Validity of a quantifier-free or universal formula, via
/// unsatisfiability of its negation.
pub fn check_valid(f: &Formula, budget: &Budget) -> Result<Validity, SolveError> {
    check_valid_stats(f, budget, &mut Stats::default())
}

pub fn check_valid_stats(
    f: &Formula,
    budget: &Budget,
    stats: &mut Stats,
) -> Result<Validity, SolveError> {
    if let Some(Quant::Exists) = f.quant() {
        return Err(SolveError::WrongPrefix(Quant::Exists));
    }
    let negated = Formula {
        prefix: f.prefix.iter().map(|(_, x)| (Quant::Exists, x.clone())).collect(),
        matrix: Matrix::not(f.matrix.clone()),
    };
    Ok(match check_sat_stats(&negated, budget, stats)? {
        SolverResult::Sat(w) => Validity::Invalid(w.decoded),
        SolverResult::Unsat(_) => Validity::Valid,
        SolverResult::Unknown(r) => Validity::Unknown(r),
    })
}

#[cfg(test)]
mod tests;
