use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::elaborate::expand_shorthands;
use crate::syntax::{parse_formula, print_formula};

fn w(s: &str) -> Vec<Letter> {
    s.bytes().filter(|b| !b.is_ascii_whitespace()).map(|b| b - b'a').collect()
}

#[test]
fn integer_codes() {
    assert_eq!(encode_int(0), w("aca"));
    assert_eq!(encode_int(3), w("acbbba"));
    assert_eq!(encode_int(-2), w("adbba"));
}

#[test]
fn decoding() {
    let mut joined = encode_int(0);
    joined.extend(encode_int(2));
    assert_eq!(joined, w("aca acbba"));
    assert_eq!(decode_word(&joined), Ok(vec![0, 2]));
    assert_eq!(decode_word(&[]), Ok(vec![]));
    assert!(decode_word(&w("ab")).is_err());
    assert!(decode_word(&w("ada")).is_err());
    assert!(decode_word(&w("acb")).is_err());
}

#[test]
fn codec_round_trip() {
    for k in -1000..=1000 {
        assert_eq!(decode_word(&encode_int(k)), Ok(vec![k]));
    }
}

#[test]
fn regex_retargeting() {
    assert_eq!(encode_regex(&Regex::Lit(7)), Dfa::word(&w("acbbbbbbba")));
    let any_star = encode_regex(&Regex::star(Regex::AnyInt));
    for good in ["", "aca", "adba acbbba aca"] {
        assert!(any_star.accepts(&w(good)), "{good}");
    }
    for bad in ["ada", "a", "acaa"] {
        assert!(!any_star.accepts(&w(bad)), "{bad}");
    }
    let zeros = encode_regex(&Regex::star(Regex::Lit(0)));
    assert_eq!(
        zeros,
        WordRegex::star(WordRegex::word(&w("aca"))).to_dfa()
    );
}

fn core(src: &str) -> CoreFormula {
    expand_shorthands(&parse_formula(src).unwrap()).unwrap()
}

#[test]
fn flattening() {
    let f = flatten(&core("forall x, y, z . x ++ y = z"));
    assert_eq!(
        print_formula(f.formula()),
        "forall x, y, z, $e1 . $e1 = x ++ y => $e1 = z"
    );
    let f = flatten(&core("forall x, y, z . x + y < z"));
    assert_eq!(
        print_formula(f.formula()),
        "forall x, y, z, $f1 . $f1 == x + y => $f1 < z"
    );
    let f = flatten(&core("forall x, y . x = y"));
    assert_eq!(print_formula(f.formula()), "forall x, y . x = y");
    let f = flatten(&core("exists x . x = 0 ++ x"));
    assert_eq!(
        print_formula(f.formula()),
        "exists x, $e1, $e2 . $e2 in 0 & $e1 = $e2 ++ x & x = $e1"
    );
}

#[test]
fn frames() {
    let (_, frames) = attach_frame(&core("forall x . x = x"));
    assert_eq!(frames.len(), 1);
    let (f, frames) = attach_frame(&core("forall x, y . x = y"));
    assert_eq!(frames.len(), 2);
    assert_eq!(f.formula().prefix.len(), 2 + 8);
    let (f, frames) = attach_frame(&core("true"));
    assert!(frames.is_empty());
    assert!(f.formula().prefix.is_empty());

    let ev = &attach_frame(&core("forall x . x = x")).1["x"];
    let lit = ev.literal_constraint();
    let compact = ev.compact_constraint();
    // both frames agree on the induced head for every small sequence
    for x in [vec![], vec![0], vec![-3, 1], vec![4, 4, 4]] {
        let head = encode_int(x.first().copied().unwrap_or(0));
        let tail = encode_seq(x.get(1..).unwrap_or(&[]));
        let (s, m) = (head[1], head[2..head.len() - 1].to_vec());
        let mut env: BTreeMap<String, Vec<Letter>> = BTreeMap::new();
        env.insert("x".into(), encode_seq(&x));
        env.insert(ev.head.clone(), head);
        env.insert(ev.sign.clone(), vec![s]);
        env.insert(ev.modulus.clone(), m);
        let literal_tail = if x.is_empty() { vec![] } else { tail.clone() };
        env.insert(ev.tail.clone(), literal_tail);
        assert_eq!(lit.eval(&env), Some(true), "{x:?}");
        let mut padded = tail;
        padded.extend(encode_int(0));
        if !x.is_empty() {
            env.insert(ev.tail.clone(), padded);
        } else {
            env.insert(ev.tail.clone(), vec![]);
        }
        assert_eq!(compact.eval(&env), Some(true), "{x:?}");
    }
}

fn frame(x: &str) -> EncodedVar {
    EncodedVar {
        base: x.into(),
        head: alloc::format!("h{x}"),
        tail: alloc::format!("t{x}"),
        sign: alloc::format!("s{x}"),
        modulus: alloc::format!("m{x}"),
    }
}

fn frame_env(env: &mut BTreeMap<String, Vec<Letter>>, x: &str, k: i64) {
    let code = encode_int(k);
    env.insert(alloc::format!("h{x}"), code.clone());
    env.insert(alloc::format!("s{x}"), vec![code[1]]);
    env.insert(alloc::format!("m{x}"), code[2..code.len() - 1].to_vec());
}

fn eliminator(frames: &BTreeMap<String, EncodedVar>) -> Eliminator<'_> {
    Eliminator {
        frames,
        fresh: FreshNames::default(),
        arithmetic: BTreeSet::new(),
        pairs: BTreeMap::new(),
    }
}

#[test]
fn comparison_branches() {
    let frames: BTreeMap<_, _> = ["i", "j"].iter().map(|x| (String::from(*x), frame(x))).collect();
    let mut el = eliminator(&frames);
    let lt = el.lt("i", "j").unwrap();
    let p = el.pairs.values().next().unwrap().clone();
    let mut env = BTreeMap::new();
    frame_env(&mut env, "i", 1);
    frame_env(&mut env, "j", 2);
    env.insert(p.clone(), w("b"));
    assert_eq!(lt.eval(&env), Some(true));
    // the middle branch is the one that holds
    let WordFormula::Or(branches) = &lt else { panic!() };
    let holding: Vec<bool> = branches.iter().map(|b| b.eval(&env).unwrap()).collect();
    assert_eq!(holding, vec![false, true, false]);

    for (a, b) in [(-3, -1), (-1, 0), (0, 4), (2, 2), (3, -5), (-1, -3)] {
        let mut env = BTreeMap::new();
        frame_env(&mut env, "i", a);
        frame_env(&mut env, "j", b);
        let diff = (a.abs() - b.abs()).unsigned_abs() as usize;
        env.insert(p.clone(), vec![B; diff.max(1)]);
        assert_eq!(lt.eval(&env), Some(a < b), "{a} < {b}");
    }
}

#[test]
fn sum_branches() {
    let frames: BTreeMap<_, _> = ["i", "j", "k"].iter().map(|x| (String::from(*x), frame(x))).collect();
    let mut el = eliminator(&frames);
    let sum = el.sum("k", "i", "j").unwrap();
    let p = el.pairs.values().next().unwrap().clone();
    let mut env = BTreeMap::new();
    frame_env(&mut env, "i", 2);
    frame_env(&mut env, "j", -2);
    frame_env(&mut env, "k", 0);
    env.insert(p.clone(), w("b"));
    let WordFormula::Or(branches) = &sum else { panic!() };
    let holding: Vec<bool> = branches.iter().map(|b| b.eval(&env).unwrap()).collect();
    assert_eq!(holding, vec![false, true, false, false]);

    for a in -3..=3i64 {
        for b in -3..=3i64 {
            for c in -6..=6i64 {
                let mut env = BTreeMap::new();
                frame_env(&mut env, "i", a);
                frame_env(&mut env, "j", b);
                frame_env(&mut env, "k", c);
                let diff = (a.abs() - b.abs()).unsigned_abs() as usize;
                env.insert(p.clone(), vec![B; diff.max(1)]);
                assert_eq!(sum.eval(&env), Some(c == a + b), "{c} = {a} + {b}");
            }
        }
    }
}

#[test]
fn zero_becomes_a_head_membership() {
    let f = flatten(&core("forall x . x == 0"));
    let (framed, frames) = attach_frame(&f);
    let wp = eliminate_eq_diff_lt_sum(&framed, &frames).unwrap();
    let hx = &frames["x"].head;
    assert!(wp
        .memberships()
        .contains(&WordAtom::In(hx.clone(), Dfa::word(&w("aca")))));
}

#[test]
fn encoded_problems_are_word_level() {
    let wp = encode(&parse_formula("forall x . x = x").unwrap()).unwrap();
    assert_eq!(wp.polarity, Quant::Forall);
    assert!(wp.equations().iter().all(|a| matches!(a, WordAtom::Eq(..))));
    let wp = encode(&parse_formula("forall u, v . first(u) + 1 <= last(v) - 3").unwrap()).unwrap();
    assert!(wp.size() > 0);
    assert!(!wp.disequations().is_empty() || !wp.equations().is_empty());
}

#[test]
fn non_flat_atoms_are_reported() {
    let f = CoreFormula::new(parse_formula("forall x, y . x ++ y = y ++ x").unwrap(), Quant::Forall).unwrap();
    let (framed, frames) = attach_frame(&f);
    assert!(matches!(
        eliminate_eq_diff_lt_sum(&framed, &frames),
        Err(EncodeError::NotFlat(_))
    ));
}
