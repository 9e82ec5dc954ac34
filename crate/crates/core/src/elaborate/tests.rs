use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::oracle::{eval, Assignment, Bounds};
use crate::syntax::{parse_formula, print_formula};

#[test]
fn subsequence_values() {
    let v = [5, 6, 7];
    assert_eq!(subseq_eval(&v, 1, 2), vec![5, 6]);
    assert_eq!(subseq_eval(&v, 2, 0), vec![6, 7]);
    assert_eq!(subseq_eval(&v, 2, 5), Vec::<i64>::new());
    assert_eq!(subseq_eval(&v, -1, 0), vec![6, 7]);
    assert_eq!(subseq_eval(&v, 0, 0), vec![7]);
    assert_eq!(subseq_eval(&v, 1, 1), vec![5]);
    assert_eq!(subseq_eval(&[], 1, 1), Vec::<i64>::new());
}

fn core(src: &str) -> Formula {
    expand_shorthands(&parse_formula(src).unwrap())
        .unwrap()
        .into_formula()
}

#[test]
fn output_is_core() {
    for src in [
        "last(x) = 0",
        "forall x . x[2:0] ++ first(x) = x & len(x) >= 3",
        "exists u . u != 5 & u >= -2 & len(u) < 4",
        "forall x, y . x in {1, 2, 3}* => x[-1:0] <= y",
    ] {
        let f = core(src);
        assert_eq!(non_core_construct(&f), None, "{}", print_formula(&f));
    }
    assert_eq!(
        non_core_construct(&parse_formula("x <= y").unwrap()),
        Some("derived comparison")
    );
}

#[test]
fn last_uses_the_suffix_case() {
    let f = core("last(x) = 0");
    let text = print_formula(&f);
    // only the branch counting from the end survives constant folding
    assert!(text.contains("x in (INT INT*)"), "{text}");
    assert!(text.contains("$v2 in INT & $w3 in eps"), "{text}");
    assert_eq!(text.matches("x = $u1 ++ $v2 ++ $w3").count(), 1, "{text}");
}

#[test]
fn short_length_is_a_union_of_powers() {
    let f = core("len(x) < 2");
    assert_eq!(
        f.matrix,
        Matrix::Atom(Atom::InRegex(
            SeqTerm::var("x"),
            Regex::union(Regex::Eps, Regex::AnyInt)
        ))
    );
    assert_eq!(core("len(x) < 0").matrix, Matrix::False);
}

#[test]
fn polarity_of_guards() {
    let f = core("forall x . first(x) = x");
    assert!(matches!(f.matrix, Matrix::Imp(..)));
    assert!(f.prefix.iter().all(|(q, _)| *q == Quant::Forall));
    let f = core("exists x . first(x) = x");
    assert!(matches!(f.matrix, Matrix::And(..)));
    assert_eq!(f.prefix.len(), 4);
}

#[test]
fn identical_subsequences_share_variables() {
    let f = core("first(x) = first(x) + 0");
    assert_eq!(f.prefix.len(), 3);
}

#[test]
fn mixed_prefix_is_rejected() {
    let f = Formula {
        prefix: vec![(Quant::Forall, "x".into()), (Quant::Exists, "y".into())],
        matrix: Matrix::True,
    };
    assert_eq!(expand_shorthands(&f), Err(ElaborationError::MixedPrefix));
}

#[test]
fn reversal_update_axioms() {
    let f = parse_formula("rev(r ++ s[0:0]) = rev(eps) ++ rev(5) ++ rev(rev(t) ++ 3)").unwrap();
    let g = apply_reversal_axioms(&f);
    assert_eq!(
        print_formula(&g),
        "s[0:0] ++ rev(r) = eps ++ 5 ++ (3 ++ rev(rev(t)))"
    );
    let g = apply_reversal_axioms(&parse_formula("rev(u) = eps").unwrap());
    assert_eq!(print_formula(&g), "u = eps");
}

#[test]
fn residual_reversal_is_an_error() {
    let f = parse_formula("rev(x) = x").unwrap();
    assert!(matches!(
        expand_shorthands(&apply_reversal_axioms(&f)),
        Err(ElaborationError::ResidualReversal(_))
    ));
}

/// Truth of a universally closed expansion at a fixed value of `x`,
/// enumerating the generated variables over the values of `x`.
fn expanded_holds(src: &str, x: &[i64]) -> bool {
    let f = core(src);
    let env: Assignment = [("x".into(), x.to_vec())].into_iter().collect();
    eval(&f, &env, Some(&Bounds::new(3, -1, 0).unwrap())).unwrap()
}

#[test]
fn expansion_agrees_with_direct_evaluation() {
    let xs: [&[i64]; 6] = [&[], &[0], &[-1, 0], &[0, -1], &[-1, 0, 0], &[0, 0, -1]];
    for src in [
        "last(x) = 0",
        "first(x) = -1",
        "x[2:0] = 0 ++ -1",
        "x[-1:0] in (INT INT)",
        "x[2:3] = eps",
        "x[3:1] = eps",
        "len(x) != 2",
    ] {
        let direct = parse_formula(src).unwrap();
        for x in xs {
            let env: Assignment = [("x".into(), x.to_vec())].into_iter().collect();
            let want = eval(&direct, &env, None).unwrap();
            assert_eq!(expanded_holds(src, x), want, "{src} at {x:?}");
        }
    }
}
