//! Results as text or `res-1`/`wp-1` JSON.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::{json, Map, Value};

use seqsolve_core::automata::{letter_char, Dfa, LETTERS};
use seqsolve_core::encode::{Sym, WordAtom, WordFormula, WordProblem};
use seqsolve_core::wordsolver::{BudgetReport, SolverResult, UnknownCause, UnsatReason, Validity};

pub type Assignment = BTreeMap<String, Vec<i64>>;

/// One verdict with its statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub model: Option<Assignment>,
    pub note: Option<String>,
    pub nodes: usize,
    pub time_ms: u128,
    pub bound: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Valid,
    Sat,
    Invalid,
    Unsat,
    Unknown,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Valid => "valid",
            Status::Sat => "sat",
            Status::Invalid => "invalid",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Valid | Status::Sat => 0,
            Status::Invalid | Status::Unsat => 1,
            Status::Unknown => 2,
        }
    }
}

pub fn cause_text(c: UnknownCause) -> &'static str {
    match c {
        UnknownCause::NodeBudget => "node budget exhausted",
        UnknownCause::LengthCap => "witness length cap reached",
        UnknownCause::ClauseCap => "clause cap exceeded",
        UnknownCause::WitnessRejected => "candidate model failed the ground check",
        UnknownCause::Weakened => "counterexample to a weakened condition",
        UnknownCause::Unencodable => "outside the universal fragment",
    }
}

fn unknown_note(r: &BudgetReport) -> Option<String> {
    Some(cause_text(r.cause).to_string())
}

impl Outcome {
    pub fn from_sat(r: &SolverResult, nodes: usize, time_ms: u128, bound: usize) -> Outcome {
        let (status, model, note) = match r {
            SolverResult::Sat(w) => (Status::Sat, Some(w.decoded.clone()), None),
            SolverResult::Unsat(UnsatReason::Exhausted) => (Status::Unsat, None, None),
            SolverResult::Unsat(UnsatReason::LengthInfeasible) => {
                (Status::Unsat, None, Some("length constraints are infeasible".into()))
            }
            SolverResult::Unknown(b) => (Status::Unknown, None, unknown_note(b)),
        };
        Outcome {
            status,
            model,
            note,
            nodes,
            time_ms,
            bound,
        }
    }

    pub fn from_valid(r: &Validity, nodes: usize, time_ms: u128, bound: usize) -> Outcome {
        let (status, model, note) = match r {
            Validity::Valid => (Status::Valid, None, None),
            Validity::Invalid(cex) => (Status::Invalid, Some(cex.clone()), None),
            Validity::Unknown(b) => (Status::Unknown, None, unknown_note(b)),
        };
        Outcome {
            status,
            model,
            note,
            nodes,
            time_ms,
            bound,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), json!("res-1"));
        m.insert("status".into(), json!(self.status.name()));
        if let Some(model) = &self.model {
            let key = if self.status == Status::Invalid {
                "counterexample"
            } else {
                "witness"
            };
            m.insert(key.into(), json!(model));
        }
        if let Some(n) = &self.note {
            m.insert("note".into(), json!(n));
        }
        m.insert(
            "stats".into(),
            json!({"nodes": self.nodes, "time_ms": self.time_ms as u64, "bound": self.bound}),
        );
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from(self.status.name());
        if let Some(n) = &self.note {
            let _ = write!(s, " ({n})");
        }
        s.push('\n');
        if let Some(model) = &self.model {
            let label = if self.status == Status::Invalid {
                "counterexample"
            } else {
                "witness"
            };
            let _ = writeln!(s, "{label}:");
            for (x, v) in model {
                let _ = writeln!(s, "  {x} = {}", show_seq(v));
            }
        }
        s
    }
}

pub fn show_seq(v: &[i64]) -> String {
    let items: Vec<String> = v.iter().map(|k| k.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn word_text(w: &[Sym]) -> String {
    if w.is_empty() {
        return "eps".into();
    }
    let parts: Vec<String> = w
        .iter()
        .map(|s| match s {
            Sym::Var(x) => x.clone(),
            Sym::Letter(l) => letter_char(*l).to_string(),
        })
        .collect();
    parts.join(" ")
}

fn word_json(w: &[Sym]) -> Value {
    Value::Array(
        w.iter()
            .map(|s| match s {
                Sym::Var(x) => json!({"var": x}),
                Sym::Letter(l) => json!(letter_char(*l).to_string()),
            })
            .collect(),
    )
}

pub fn dfa_json(d: &Dfa) -> Value {
    let transitions: Vec<Value> = (0..d.states())
        .map(|q| {
            let row: Map<String, Value> = LETTERS
                .iter()
                .map(|&l| (letter_char(l).to_string(), json!(d.step(q, l))))
                .collect();
            Value::Object(row)
        })
        .collect();
    let accepting: Vec<usize> = (0..d.states()).filter(|&q| d.is_accepting(q)).collect();
    json!({"states": d.states(), "start": 0, "accepting": accepting, "transitions": transitions})
}

/// Index of every distinct automaton, in order of first appearance.
fn automata(wp: &WordProblem) -> Vec<Dfa> {
    let mut out: Vec<Dfa> = Vec::new();
    for a in wp.memberships() {
        if let WordAtom::In(_, d) = a {
            if !out.contains(&d) {
                out.push(d);
            }
        }
    }
    out
}

fn formula_text(f: &WordFormula, dfas: &[Dfa]) -> String {
    let sub = |g: &WordFormula| match g {
        WordFormula::Atom(_) | WordFormula::True | WordFormula::False | WordFormula::Not(_) => {
            formula_text(g, dfas)
        }
        _ => format!("({})", formula_text(g, dfas)),
    };
    match f {
        WordFormula::True => "true".into(),
        WordFormula::False => "false".into(),
        WordFormula::Atom(WordAtom::Eq(l, r)) => format!("{} = {}", word_text(l), word_text(r)),
        WordFormula::Atom(WordAtom::In(x, d)) => {
            let k = dfas.iter().position(|e| e == d).unwrap_or(0);
            format!("{x} in L{k}")
        }
        WordFormula::Not(a) => format!("!{}", sub(a)),
        WordFormula::And(xs) | WordFormula::Or(xs) => {
            let op = if matches!(f, WordFormula::And(_)) { " & " } else { " | " };
            if xs.is_empty() {
                return if op == " & " { "true".into() } else { "false".into() };
            }
            xs.iter().map(sub).collect::<Vec<_>>().join(op)
        }
        WordFormula::Imp(a, b) => format!("{} => {}", sub(a), sub(b)),
        WordFormula::Iff(a, b) => format!("{} <=> {}", sub(a), sub(b)),
    }
}

pub fn word_problem_json(wp: &WordProblem) -> Value {
    let dfas = automata(wp);
    let eqs = |atoms: Vec<WordAtom>| -> Vec<Value> {
        atoms
            .into_iter()
            .filter_map(|a| match a {
                WordAtom::Eq(l, r) => Some(json!({"lhs": word_json(&l), "rhs": word_json(&r)})),
                WordAtom::In(..) => None,
            })
            .collect()
    };
    let memberships: Vec<Value> = wp
        .memberships()
        .into_iter()
        .filter_map(|a| match a {
            WordAtom::In(x, d) => Some(json!({"var": x, "dfa": dfa_json(&d)})),
            WordAtom::Eq(..) => None,
        })
        .collect();
    json!({
        "schema": "wp-1",
        "polarity": if wp.polarity == seqsolve_core::syntax::Quant::Forall { "forall" } else { "exists" },
        "vars": wp.vars.iter().collect::<Vec<_>>(),
        "source_vars": wp.source_vars,
        "size": wp.size(),
        "matrix": formula_text(&wp.matrix, &dfas),
        "equations": eqs(wp.equations()),
        "disequations": eqs(wp.disequations()),
        "memberships": memberships,
    })
}

pub fn word_problem_text(wp: &WordProblem) -> String {
    let dfas = automata(wp);
    let mut s = String::new();
    let q = if wp.polarity == seqsolve_core::syntax::Quant::Forall { "forall" } else { "exists" };
    let vars: Vec<&str> = wp.vars.iter().map(|x| x.as_str()).collect();
    let _ = writeln!(s, "{q} {} .", vars.join(", "));
    let _ = writeln!(s, "  {}", formula_text(&wp.matrix, &dfas));
    for (k, d) in dfas.iter().enumerate() {
        let accepting: Vec<String> =
            (0..d.states()).filter(|&q| d.is_accepting(q)).map(|q| q.to_string()).collect();
        let _ = writeln!(s, "L{k}: {} states, accepting {{{}}}", d.states(), accepting.join(", "));
        for q in 0..d.states() {
            let row: Vec<String> = LETTERS
                .iter()
                .map(|&l| format!("{}->{}", letter_char(l), d.step(q, l)))
                .collect();
            let _ = writeln!(s, "  {q}: {}", row.join(" "));
        }
    }
    let _ = writeln!(s, "size {}", wp.size());
    s
}
