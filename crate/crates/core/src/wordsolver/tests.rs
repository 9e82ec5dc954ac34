use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::automata::{Dfa, WordRegex, A, B};
use crate::encode::{Sym, WordAtom, WordFormula};
use crate::syntax::parse_formula;

fn v(x: &str) -> Sym {
    Sym::Var(x.into())
}

fn l(c: char) -> Sym {
    Sym::Letter(c as u8 - b'a')
}

fn atom(name: &str) -> WordFormula {
    WordFormula::Atom(WordAtom::Eq(vec![v(name)], vec![v("z")]))
}

fn lit(name: &str) -> Literal {
    Literal::Eq(vec![v(name)], vec![v("z")])
}

#[test]
fn dnf_shapes() {
    let f = WordFormula::And(vec![WordFormula::Or(vec![atom("a"), atom("b")]), atom("c")]);
    let clauses = nnf_dnf(&f, 100).unwrap();
    let sets: Vec<Vec<Literal>> = clauses
        .into_iter()
        .map(|c| {
            let mut ls = c.literals;
            ls.sort();
            ls
        })
        .collect();
    assert_eq!(sets, vec![vec![lit("a"), lit("c")], vec![lit("b"), lit("c")]]);

    let d = Dfa::word(&[A]);
    let f = WordFormula::not(WordFormula::And(vec![
        atom("x"),
        WordFormula::is_in("x", d.clone()),
    ]));
    let clauses = nnf_dnf(&f, 100).unwrap();
    assert_eq!(clauses.len(), 2);
    assert_eq!(clauses[0].literals, vec![Literal::Ne(vec![v("x")], vec![v("z")])]);
    assert_eq!(clauses[1].literals, vec![Literal::In("x".into(), d.complement())]);

    let f = WordFormula::imp(atom("a"), atom("b"));
    let clauses = nnf_dnf(&f, 100).unwrap();
    assert_eq!(clauses.len(), 2);
    assert!(matches!(clauses[0].literals[0], Literal::Ne(..)));
    assert_eq!(clauses[1].literals, vec![lit("b")]);

    let many = WordFormula::And(
        (0..13)
            .map(|i| {
                WordFormula::Or(vec![
                    atom(&alloc::format!("p{i}")),
                    atom(&alloc::format!("q{i}")),
                ])
            })
            .collect(),
    );
    assert_eq!(nnf_dnf(&many, 4096), Err(ClauseCapExceeded { cap: 4096 }));
}

#[test]
fn disequation_shapes() {
    let c = Clause {
        literals: vec![Literal::Ne(vec![l('a')], vec![l('b')])],
    };
    assert_eq!(eliminate_disequations(&c), vec![Clause::default()]);
    let c = Clause {
        literals: vec![Literal::Ne(vec![v("x")], vec![v("x")])],
    };
    assert!(eliminate_disequations(&c).is_empty());
    let c = Clause {
        literals: vec![Literal::Ne(vec![v("x")], vec![])],
    };
    let out = eliminate_disequations(&c);
    assert_eq!(out.len(), 1);
    let Literal::In(x, d) = &out[0].literals[0] else {
        panic!()
    };
    assert_eq!(x, "x");
    assert!(!d.accepts(&[]) && d.accepts(&[A]) && d.accepts(&[B, A]));
    // the general case keeps one alternative per first difference
    let c = Clause {
        literals: vec![Literal::Ne(vec![v("x"), l('a')], vec![l('b'), v("y")])],
    };
    assert_eq!(eliminate_disequations(&c).len(), 6);
}

fn clause(lits: Vec<Literal>) -> Clause {
    Clause { literals: lits }
}

fn sigma_ab() -> Dfa {
    WordRegex::star(WordRegex::Union(vec![
        WordRegex::Letter(A),
        WordRegex::Letter(B),
    ]))
    .to_dfa()
}

#[test]
fn small_clauses() {
    let budget = Budget::default();
    let c = clause(vec![
        Literal::Eq(vec![v("x"), l('a')], vec![l('a'), v("x")]),
        Literal::In("x".into(), sigma_ab()),
    ]);
    match solve_clause(&c, &budget) {
        SolverResult::Sat(w) => assert_eq!(w.words["x"], Vec::<u8>::new()),
        other => panic!("{other:?}"),
    }
    let c = clause(vec![Literal::Eq(vec![v("x")], vec![l('a'), v("x")])]);
    assert!(matches!(solve_clause(&c, &budget), SolverResult::Unsat(_)));
    let c = clause(vec![Literal::Eq(vec![v("x"), l('b')], vec![l('a'), v("x")])]);
    assert!(matches!(solve_clause(&c, &budget), SolverResult::Unsat(_)));
}

/// All words over {a,b,c,d} up to length `n`.
fn words(n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for l in 0..4u8 {
                let mut w2: Vec<u8> = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[test]
fn letter_swap_has_no_solution_up_to_six() {
    let c = clause(vec![Literal::Eq(vec![v("x"), l('b')], vec![l('a'), v("x")])]);
    for w in words(6) {
        let env: BTreeMap<String, Vec<u8>> = [(String::from("x"), w)].into_iter().collect();
        assert_eq!(c.holds(&env), Some(false));
    }
}

fn sat(src: &str) -> SolverResult {
    check_sat(&parse_formula(src).unwrap(), &Budget::default()).unwrap()
}

fn valid(src: &str) -> Validity {
    check_valid(&parse_formula(src).unwrap(), &Budget::default()).unwrap()
}

#[test]
fn satisfiability_examples() {
    assert!(matches!(sat("x = x ++ 1"), SolverResult::Unsat(_)));
    match sat("first(x) == 1 & len(x) = 1") {
        SolverResult::Sat(w) => assert_eq!(w.decoded["x"], vec![1]),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        sat("u in (3 7 2) & u in (INT* 7 INT*)"),
        SolverResult::Sat(_)
    ));
}

#[test]
fn validity_examples() {
    assert_eq!(valid("forall x . x = x"), Validity::Valid);
    assert_eq!(valid("forall x . x ++ eps = x"), Validity::Valid);
    match valid("forall x . x = eps") {
        Validity::Invalid(cex) => assert!(!cex["x"].is_empty()),
        other => panic!("{other:?}"),
    }
}
