//! Randomized properties of the pipeline, checked against the bounded
//! evaluator.

use std::collections::BTreeMap;

use proptest::prelude::*;

use seqsolve_core::automata::{Letter, LETTERS};
use seqsolve_core::elaborate::subseq_eval;
use seqsolve_core::encode::{decode_word, encode, encode_as, encode_int, encode_seq, FrameStyle};
use seqsolve_core::oracle::{brute_force_sat, eval, Assignment, Bounds, BruteResult};
use seqsolve_core::syntax::{parse_formula, print_formula, Quant};
use seqsolve_core::wordsolver::{
    check_sat, nnf_dnf, solve_problem, Budget, SolverResult, Stats,
};

fn var() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "z"]).prop_map(String::from)
}

fn lit() -> impl Strategy<Value = String> {
    (-2i64..=2).prop_map(|k| if k < 0 { format!("({k})") } else { k.to_string() })
}

fn seq_item() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => var(),
        1 => lit(),
        1 => (var(), -2i64..=2, -2i64..=2).prop_map(|(x, a, b)| format!("{x}[{a}:{b}]")),
        1 => var().prop_map(|x| format!("first({x})")),
        1 => var().prop_map(|x| format!("last({x})")),
    ]
}

fn seq_term() -> impl Strategy<Value = String> {
    prop_oneof![
        1 => Just("eps".to_string()),
        6 => prop::collection::vec(seq_item(), 1..=3).prop_map(|v| v.join(" ++ ")),
    ]
}

fn int_term() -> impl Strategy<Value = String> {
    prop_oneof![
        var(),
        lit(),
        (var(), lit()).prop_map(|(x, k)| format!("{x} + {k}")),
        (var(), var()).prop_map(|(x, y)| format!("{x} - {y}")),
    ]
}

fn regex() -> impl Strategy<Value = String> {
    let item = prop_oneof![
        lit(),
        Just("INT".to_string()),
        Just("INT*".to_string()),
        (lit(), lit()).prop_map(|(a, b)| format!("({a} | {b})*")),
    ];
    prop::collection::vec(item, 1..=3).prop_map(|v| format!("({})", v.join(" ")))
}

fn atom() -> impl Strategy<Value = String> {
    let rel = prop::sample::select(vec!["==", "!=", "<", "<=", ">", ">="]);
    let len_rel = prop::sample::select(vec!["=", "!=", "<", "<=", ">", ">="]);
    prop_oneof![
        3 => (seq_term(), seq_term()).prop_map(|(a, b)| format!("{a} = {b}")),
        3 => (int_term(), rel, int_term()).prop_map(|(a, r, b)| format!("{a} {r} {b}")),
        1 => (var(), len_rel, 0u8..=2).prop_map(|(x, r, n)| format!("len({x}) {r} {n}")),
        1 => (var(), regex()).prop_map(|(x, r)| format!("{x} in {r}")),
    ]
}

/// Quantifier-free formulas with at most four atoms.
fn matrix() -> impl Strategy<Value = String> {
    let op = prop::sample::select(vec!["&", "|", "=>", "<=>"]);
    prop_oneof![
        atom(),
        (atom(), op.clone(), atom()).prop_map(|(a, o, b)| format!("({a}) {o} ({b})")),
        (atom(), atom(), op.clone(), atom(), atom(), op.clone(), op).prop_map(
            |(a, b, o1, c, d, o2, o3)| format!("(({a}) {o1} ({b})) {o3} (({c}) {o2} ({d}))")
        ),
    ]
    .prop_flat_map(|m| prop_oneof![Just(m.clone()), Just(format!("!({m})"))])
}

fn small() -> Bounds {
    Bounds::new(3, -2, 2).unwrap()
}

fn words(n: usize) -> impl Strategy<Value = Vec<Vec<Letter>>> {
    prop::collection::vec(prop::collection::vec(prop::sample::select(LETTERS.to_vec()), 0..6), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_round_trips(m in matrix(), q in 0..3usize) {
        let text = match q {
            0 => m,
            1 => format!("forall x, y . {m}"),
            _ => format!("exists z . {m}"),
        };
        let f = parse_formula(&text).unwrap();
        let printed = print_formula(&f);
        prop_assert_eq!(parse_formula(&printed).unwrap(), f, "{}", printed);
    }

    #[test]
    fn codec_round_trips(k in -100_000i64..100_000, v in prop::collection::vec(-50i64..50, 0..6)) {
        prop_assert_eq!(decode_word(&encode_int(k)).unwrap(), vec![k]);
        prop_assert_eq!(decode_word(&encode_seq(&v)).unwrap(), v);
    }

    #[test]
    fn subsequence_is_slicing(v in prop::collection::vec(-3i64..3, 1..8), a in 0usize..8, b in 0usize..8) {
        let (k1, k2) = (a.min(b) % v.len() + 1, a.max(b) % v.len() + 1);
        let (k1, k2) = (k1.min(k2), k1.max(k2));
        prop_assert_eq!(subseq_eval(&v, k1 as i64, k2 as i64), v[k1 - 1..k2].to_vec());
    }

    #[test]
    fn dnf_keeps_the_meaning(m in matrix(), ws in words(12)) {
        let f = parse_formula(&m).unwrap();
        let wp = encode(&f).unwrap();
        let Ok(clauses) = nnf_dnf(&wp.matrix, 4096) else { return Ok(()); };
        let env: BTreeMap<String, Vec<Letter>> = wp.matrix.vars().into_iter().zip(ws).collect();
        prop_assume!(env.len() == wp.matrix.vars().len());
        let direct = wp.matrix.eval(&env);
        let via_dnf = clauses.iter().any(|c| c.holds(&env) == Some(true));
        prop_assert_eq!(direct, Some(via_dnf));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn solver_agrees_with_the_oracle(m in matrix()) {
        let f = parse_formula(&m).unwrap();
        let oracle = brute_force_sat(&f, &small()).unwrap();
        match check_sat(&f, &Budget::default()).unwrap() {
            SolverResult::Unsat(_) => prop_assert_eq!(oracle, BruteResult::NoModelWithinBounds),
            SolverResult::Sat(w) => {
                let env: Assignment = w.decoded.clone();
                prop_assert_eq!(eval(&f, &env, None), Ok(true));
            }
            SolverResult::Unknown(_) => {}
        }
    }

    #[test]
    fn witnesses_satisfy_the_word_problem(m in matrix()) {
        let f = parse_formula(&m).unwrap();
        let wp = encode_as(&f, Quant::Exists, FrameStyle::Compact).unwrap();
        if let SolverResult::Sat(w) = solve_problem(&wp, &Budget::default(), &mut Stats::default()) {
            let mut env = w.words.clone();
            for x in wp.matrix.vars() {
                env.entry(x).or_default();
            }
            prop_assert_eq!(wp.matrix.eval(&env), Some(true));
            for x in &wp.source_vars {
                if let Some(word) = w.words.get(x) {
                    prop_assert!(decode_word(word).is_ok(), "{} = {:?}", x, word);
                }
            }
        }
    }

    #[test]
    fn branch_order_does_not_change_verdicts(m in matrix()) {
        let f = parse_formula(&m).unwrap();
        let forward = check_sat(&f, &Budget::default()).unwrap();
        let backward = check_sat(&f, &Budget { reverse_branches: true, ..Budget::default() }).unwrap();
        let definite = |r: &SolverResult| match r {
            SolverResult::Sat(_) => Some(true),
            SolverResult::Unsat(_) => Some(false),
            SolverResult::Unknown(_) => None,
        };
        if let (Some(a), Some(b)) = (definite(&forward), definite(&backward)) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn larger_bounds_keep_models(m in matrix()) {
        let f = parse_formula(&m).unwrap();
        let narrow = brute_force_sat(&f, &Bounds::new(1, -1, 1).unwrap()).unwrap();
        if let BruteResult::Sat(_) = narrow {
            let wide = brute_force_sat(&f, &Bounds::new(2, -2, 2).unwrap()).unwrap();
            prop_assert!(matches!(wide, BruteResult::Sat(_)));
        }
    }
}
