use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::oracle::{eval_matrix, eval_seq, Assignment};
use crate::syntax::parse_formula_internal;

const REVERSE: &str = include_str!("../../programs/reverse.sqp");
const MERGESORT: &str = include_str!("../../programs/mergesort.sqp");

fn program(text: &str) -> Program {
    parse_program(text).unwrap()
}

/// Body and postcondition of the only routine of `text`.
fn single(text: &str) -> (Program, Vec<Stmt>, Prop) {
    let p = program(text);
    let r = p.routines[0].clone();
    (p, r.body, r.ensure)
}

fn mat(src: &str) -> Prop {
    Prop::Mat(parse_formula_internal(src).unwrap().matrix)
}

#[test]
fn skip_leaves_the_postcondition() {
    let (p, body, post) = single("routine f(x) do skip ensure x = 1 ++ x end");
    assert_eq!(wp(&p, &body[0], &post).unwrap(), post);
}

#[test]
fn assignment_substitutes_into_predicates() {
    let text = "predicate sorted(u) := forall h, m, t . u = h ++ m ++ t & len(m) > 1 & len(t) > 0 => m <= t
                routine f(v) do Result := Result ++ v ensure sorted(Result) end";
    let (p, body, post) = single(text);
    let got = wp(&p, &body[0], &post).unwrap();
    let want = program(
        "predicate sorted(u) := forall h, m, t . u = h ++ m ++ t & len(m) > 1 & len(t) > 0 => m <= t
         routine g(v) do skip ensure sorted(Result ++ v) end",
    )
    .routines[0]
        .ensure
        .clone();
    assert_eq!(got, want);
}

#[test]
fn substitution_avoids_capture() {
    let text = "predicate p(u) := forall h . u = h
                routine f(h) do x := h ensure p(x) end";
    let (p, body, post) = single(text);
    let got = wp(&p, &body[0], &post).unwrap();
    let Prop::Forall(vs, inner) = got else { panic!("{got}") };
    assert_eq!(vs, vec![String::from("h'")]);
    assert_eq!(*inner, mat("h = h'"));
}

#[test]
fn sugar_expands() {
    let (_, body, post) = single(
        "routine f(s, x) do s.push(x.first); s.pop; x := x.rest; v := s.top ensure v = x.last end",
    );
    let rhs: Vec<String> = body
        .iter()
        .map(|s| match &s.kind {
            StmtKind::Assign(xs) => match &xs[0].1 {
                Rhs::Term(t) => crate::syntax::print_seq(t),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(rhs, ["s ++ x[1:1]", "s[1:-1]", "x[2:0]", "s[0:0]"]);
    assert_eq!(post, mat("v = x[0:0]"));
}

#[test]
fn missing_invariant_is_reported() {
    let p = program("routine f(x) do from skip until x = eps loop x := x[2:0] end end");
    assert!(matches!(vcs(&p), Err(VcError::MissingInvariant(l)) if l.first == 1));
}

#[test]
fn trivial_invariant_holds() {
    let p = program(
        "routine f(x) do
            from skip invariant true until x = eps loop skip end
         end",
    );
    let all = vcs(&p).unwrap();
    assert!(!all.is_empty());
    for vc in &all {
        let v = discharge(vc, &Budget::default(), &mut Stats::default()).unwrap();
        assert_eq!(v, Validity::Valid, "{}", vc.label);
    }
}

#[test]
fn old_refers_to_the_entry_value() {
    let p = program("routine f(a) do a := a ++ 1 ensure a = old a ++ 1 end");
    let all = vcs(&p).unwrap();
    assert_eq!(all.len(), 1);
    assert_eq!(all[0].text, "a ++ 1 = a ++ 1");
    let p = program("routine f(a) do a := a ++ 1 ensure a = old a end");
    let v = discharge(&vcs(&p).unwrap()[0], &Budget::default(), &mut Stats::default()).unwrap();
    assert!(matches!(v, Validity::Invalid(_)));
}

#[test]
fn calls_use_contracts() {
    let p = program(
        "routine inc(x) require len(x) > 0 do Result := x ++ 1 ensure Result = x ++ 1 end
         routine g(y) do z := inc(y) ensure z = y ++ 1 end",
    );
    let all: Vec<Vc> = vcs(&p).unwrap().into_iter().filter(|v| v.label.routine == "g").collect();
    let texts: Vec<&str> = all.iter().map(|v| v.text.as_str()).collect();
    assert_eq!(texts, ["len(y) > 0", "z' = y ++ 1 => z' = y ++ 1"]);
    assert_eq!(all[1].status, VcStatus::ByAssumption);
}

#[test]
fn reversal_vcs() {
    let all = vcs(&program(REVERSE)).unwrap();
    assert_eq!(all.len(), 5);
    let inductive: Vec<&Vc> = all
        .iter()
        .filter(|v| v.label.origin == Origin::InvariantInductive)
        .collect();
    assert_eq!(
        inductive[1].text,
        "s ++ rev(Result) = old_a & !s = eps => s[1:-1] ++ rev(Result ++ s[0:0]) = old_a"
    );
    for vc in &all {
        let v = discharge(vc, &Budget::default(), &mut Stats::default()).unwrap();
        assert_eq!(v, Validity::Valid, "{}", vc.label);
    }
}

#[test]
fn reversal_abstraction() {
    let f = parse_formula_internal("forall s, r . s ++ rev(r) = s").unwrap();
    let (g, weaker) = abstract_reversals(&f);
    assert!(weaker);
    assert_eq!(
        crate::syntax::print_formula(&g),
        "forall s, r, r_R' . (r_R' = eps <=> r = eps) => s ++ r_R' = s"
    );
}

#[test]
fn merge_step_is_valid() {
    let all = vcs(&program(MERGESORT)).unwrap();
    let step = all
        .iter()
        .find(|v| {
            v.label.origin == Origin::InvariantInductive
                && v.label.path.first().is_some_and(|p| p.starts_with("then"))
                && v.text.ends_with("=> (Result ++ r[1:1])[0:0] <= l[1:1]")
        })
        .expect("then-branch step");
    assert!(matches!(step.status, VcStatus::Weakened { .. }));
    let v = discharge(step, &Budget::default(), &mut Stats::default()).unwrap();
    assert_eq!(v, Validity::Valid);
}

#[test]
fn weakened_counterexamples_are_unknown() {
    // last(eps) is 0, so this asks for first(l') >= 0, which is false for l' = [-1]
    let all = vcs(&program(MERGESORT)).unwrap();
    let init = all
        .iter()
        .find(|v| v.label.origin == Origin::InvariantInit && v.text.ends_with("eps[0:0] <= l'[1:1]"))
        .unwrap();
    let v = discharge(init, &Budget::default(), &mut Stats::default()).unwrap();
    assert!(matches!(v, Validity::Unknown(r) if r.cause == UnknownCause::Weakened));
}

#[test]
fn vc_texts_parse_back() {
    for text in [REVERSE, MERGESORT] {
        for vc in vcs(&program(text)).unwrap() {
            if vc.formula.is_some() && vc.status == VcStatus::Ready {
                assert!(parse_formula_internal(&vc.text).is_ok(), "{}", vc.text);
            }
        }
    }
}

// Compositionality and soundness of wp against a concrete interpreter.

const ASSIGNS: &[&str] = &[
    "x := x ++ y",
    "y := x[2:0]",
    "x := 1 ++ y",
    "x, y := y, x",
    "y := y ++ x.first",
    "x := x[1:-1]",
    "skip",
];

const CONDS: &[&str] = &["x = y", "first(x) < first(y)", "len(x) > 1"];

const POSTS: &[&str] = &[
    "x = y",
    "first(x) <= last(y)",
    "len(x) > 1 | y = eps",
    "x ++ 1 = y",
];

fn stmt_text(code: &[usize]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < code.len() {
        let k = code[i];
        if k >= ASSIGNS.len() && i + 2 < code.len() {
            let c = CONDS[k % CONDS.len()];
            let a = ASSIGNS[code[i + 1] % ASSIGNS.len()];
            let b = ASSIGNS[code[i + 2] % ASSIGNS.len()];
            out.push_str(&alloc::format!("if {c} then {a} else {b} end; "));
            i += 3;
        } else {
            out.push_str(ASSIGNS[k % ASSIGNS.len()]);
            out.push_str("; ");
            i += 1;
        }
    }
    out
}

fn exec(stmts: &[Stmt], env: &mut Assignment) {
    for s in stmts {
        match &s.kind {
            StmtKind::Skip => {}
            StmtKind::Assign(xs) => {
                let vals: Vec<(String, Vec<i64>)> = xs
                    .iter()
                    .map(|(x, rhs)| match rhs {
                        Rhs::Term(t) => (x.clone(), eval_seq(t, env).unwrap()),
                        Rhs::Call(..) => unreachable!(),
                    })
                    .collect();
                env.extend(vals);
            }
            StmtKind::If(c, a, b) => {
                if eval_matrix(c.as_matrix().unwrap(), env).unwrap() {
                    exec(a, env)
                } else {
                    exec(b, env)
                }
            }
            other => unreachable!("{other:?}"),
        }
    }
}

fn states() -> Vec<Assignment> {
    let seqs: Vec<Vec<i64>> = vec![vec![], vec![0], vec![1], vec![0, 1], vec![1, 1], vec![1, 0, 2]];
    let mut out = Vec::new();
    for x in &seqs {
        for y in &seqs {
            out.push(
                [("x".to_string(), x.clone()), ("y".to_string(), y.clone())]
                    .into_iter()
                    .collect(),
            );
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wp_agrees_with_execution(code in proptest::collection::vec(0usize..10, 1..6), post in 0..POSTS.len()) {
        let text = alloc::format!("routine f(x, y) do {} ensure {} end", stmt_text(&code), POSTS[post]);
        let (p, body, q) = single(&text);
        let pre = wp_block(&p, &body, &q).unwrap();
        let pre = pre.as_matrix().unwrap();
        for env in states() {
            let mut after = env.clone();
            exec(&body, &mut after);
            let expect = eval_matrix(q.as_matrix().unwrap(), &after).unwrap();
            prop_assert_eq!(eval_matrix(pre, &env).unwrap(), expect, "{}", text);
        }
    }

    #[test]
    fn wp_composes(code in proptest::collection::vec(0usize..10, 2..6), cut in 1usize..5, post in 0..POSTS.len()) {
        let text = alloc::format!("routine f(x, y) do {} ensure {} end", stmt_text(&code), POSTS[post]);
        let (p, body, q) = single(&text);
        let cut = cut.min(body.len());
        let whole = wp_block(&p, &body, &q).unwrap();
        let inner = wp_block(&p, &body[cut..], &q).unwrap();
        let outer = wp_block(&p, &body[..cut], &inner).unwrap();
        for env in states() {
            prop_assert_eq!(
                eval_matrix(whole.as_matrix().unwrap(), &env).unwrap(),
                eval_matrix(outer.as_matrix().unwrap(), &env).unwrap()
            );
        }
    }
}
