use super::*;
use alloc::string::ToString;
use alloc::vec;

fn v(name: &str) -> SeqTerm {
    SeqTerm::var(name)
}

#[test]
fn parses_quantified_implication() {
    let f = parse_formula("forall h,t . u = h ++ t => first(t) <= 5").unwrap();
    assert_eq!(
        f.prefix,
        vec![(Quant::Forall, "h".to_string()), (Quant::Forall, "t".to_string())]
    );
    let expected = Matrix::imp(
        Matrix::Atom(Atom::SeqEq(v("u"), SeqTerm::concat(v("h"), v("t")))),
        Matrix::Atom(Atom::IntCmp(
            Rel::Le,
            IntTerm::seq(SeqTerm::sub(v("t"), 1, 1)),
            IntTerm::Const(5),
        )),
    );
    assert_eq!(f.matrix, expected);
}

#[test]
fn mixed_prefix_is_a_fragment_error() {
    let err = parse_formula("forall x . exists y . x = y").unwrap_err();
    assert!(matches!(err, SyntaxError::Fragment { .. }), "{err}");
}

#[test]
fn membership_regex() {
    let f = parse_formula("u in (INT* 7 INT*)").unwrap();
    let r = Regex::concat(
        Regex::concat(Regex::star(Regex::AnyInt), Regex::Lit(7)),
        Regex::star(Regex::AnyInt),
    );
    assert_eq!(f.matrix, Matrix::Atom(Atom::InRegex(v("u"), r)));
}

#[test]
fn reserved_symbols_are_rejected() {
    for text in ["elg(x, y)", "sum(x) == 3", "x = count", "σ(x) == 1"] {
        let err = parse_formula(text).unwrap_err();
        assert!(matches!(err, SyntaxError::Fragment { .. }), "{text}: {err}");
        assert!(err.to_string().contains("undecidable"), "{err}");
    }
}

#[test]
fn nested_quantifier_rejected() {
    let err = parse_formula("x = y & forall z . z = z").unwrap_err();
    assert!(matches!(err, SyntaxError::Fragment { .. }));
}

#[test]
fn generated_names_need_internal_mode() {
    assert!(parse_formula("$u1 = x").is_err());
    assert!(parse_formula_internal("$u1 = x").is_ok());
}

#[test]
fn parse_errors_carry_position() {
    let err = parse_formula("x = \n  y ++ ").unwrap_err();
    match err {
        SyntaxError::Parse { line, .. } => assert_eq!(line, 2),
        other => panic!("{other}"),
    }
}

#[test]
fn print_simple_equation() {
    let f = Formula::quantifier_free(Matrix::Atom(Atom::SeqEq(v("u"), v("v"))));
    assert_eq!(print_formula(&f), "u = v");
}

#[test]
fn round_trips() {
    for text in [
        "forall h, t . u = h ++ t => t <= v",
        "u[1:3] = v[1:3]",
        "x[-1:0] = eps",
        "forall h, m, t . u = h ++ m ++ t & len(m) = 1 & len(t) > 0 => m < t",
        "u == 1 + 3 & (x ++ y)[2:0] = z",
        "!(a = b | c = d) <=> a - (b - c) >= -2",
        "x in (eps | INT | INT^2) & y in {1, -2}* & z in 3+",
        "rev(x ++ y[0:0]) = y[0:0] ++ rev(x)",
        "(x + 1) ++ y = z",
        "true & !false => len(x) != 0",
        "a = b => c = d => e = f",
    ] {
        let f = parse_formula(text).unwrap();
        let printed = print_formula(&f);
        let again = parse_formula(&printed).unwrap();
        assert_eq!(f, again, "{text} -> {printed}");
    }
}

#[test]
fn free_vars_examples() {
    let f = parse_formula("forall h,t . u = h ++ t").unwrap();
    assert_eq!(free_vars(&f), ["u".to_string()].into_iter().collect());
    let f = parse_formula("x = y").unwrap();
    assert_eq!(free_vars(&f).len(), 2);
    let f = parse_formula("forall x . x = x").unwrap();
    assert!(free_vars(&f).is_empty());
}

#[test]
fn spans_nest() {
    let (_, spans) =
        parse_formula_spanned("forall h,t . (u = h ++ t & len(t) > 0) => first(t) <= 5 - x").unwrap();
    assert!(spans.is_nested());
}

#[test]
fn comments_are_skipped() {
    let f = parse_formula("# boundedness\nforall h,t . u = h ++ t => t <= v # trailing\n").unwrap();
    assert_eq!(f.prefix.len(), 2);
}
