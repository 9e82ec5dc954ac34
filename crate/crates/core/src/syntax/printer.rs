use alloc::string::String;
use core::fmt::Write;

use super::ast::*;

/// Renders a formula in the concrete syntax accepted by `parse_formula`.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < f.prefix.len() {
        let q = f.prefix[i].0;
        out.push_str(q.keyword());
        out.push(' ');
        let mut first = true;
        while i < f.prefix.len() && f.prefix[i].0 == q {
            if !first {
                out.push_str(", ");
            }
            out.push_str(&f.prefix[i].1);
            first = false;
            i += 1;
        }
        out.push_str(" . ");
    }
    matrix(&mut out, &f.matrix, 0);
    out
}

pub fn print_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    matrix(&mut out, m, 0);
    out
}

pub fn print_seq(t: &SeqTerm) -> String {
    let mut out = String::new();
    seq(&mut out, t, 0);
    out
}

pub fn print_int(t: &IntTerm) -> String {
    let mut out = String::new();
    int(&mut out, t, 0);
    out
}

pub fn print_regex(r: &Regex) -> String {
    let mut out = String::new();
    regex(&mut out, r, 0);
    out
}

// Matrix precedence: iff 1, imp 2, or 3, and 4, not 5.
fn matrix(out: &mut String, m: &Matrix, ctx: u8) {
    let (prec, body): (u8, &dyn Fn(&mut String)) = match m {
        Matrix::True => (6, &|o: &mut String| o.push_str("true")),
        Matrix::False => (6, &|o: &mut String| o.push_str("false")),
        Matrix::Atom(a) => (6, &|o: &mut String| atom(o, a)),
        Matrix::Not(a) => (5, &|o: &mut String| {
            o.push('!');
            matrix(o, a, 5);
        }),
        Matrix::And(a, b) => (4, &|o: &mut String| {
            matrix(o, a, 4);
            o.push_str(" & ");
            matrix(o, b, 5);
        }),
        Matrix::Or(a, b) => (3, &|o: &mut String| {
            matrix(o, a, 3);
            o.push_str(" | ");
            matrix(o, b, 4);
        }),
        Matrix::Imp(a, b) => (2, &|o: &mut String| {
            matrix(o, a, 3);
            o.push_str(" => ");
            matrix(o, b, 2);
        }),
        Matrix::Iff(a, b) => (1, &|o: &mut String| {
            matrix(o, a, 1);
            o.push_str(" <=> ");
            matrix(o, b, 2);
        }),
    };
    if prec < ctx {
        out.push('(');
        body(out);
        out.push(')');
    } else {
        body(out);
    }
}

fn atom(out: &mut String, a: &Atom) {
    match a {
        Atom::SeqEq(l, r) => {
            seq(out, l, 0);
            out.push_str(" = ");
            seq(out, r, 0);
        }
        Atom::InRegex(l, r) => {
            seq(out, l, 0);
            out.push_str(" in ");
            regex(out, r, 3);
        }
        Atom::IntCmp(rel, l, r) => {
            int(out, l, 0);
            let _ = write!(out, " {} ", rel.int_token());
            int(out, r, 0);
        }
        Atom::LenCmp(s, rel, k) => {
            out.push_str("len(");
            seq(out, s, 0);
            let _ = write!(out, ") {} {}", rel.len_token(), k);
        }
    }
}

// Term precedence: additive 2, concat 3, postfix 5, primary 6.
fn seq(out: &mut String, t: &SeqTerm, ctx: u8) {
    match t {
        SeqTerm::Var(v) => out.push_str(v),
        SeqTerm::Empty => out.push_str("eps"),
        SeqTerm::Int(i) => int(out, i, ctx),
        SeqTerm::Concat(a, b) => paren(out, 3 < ctx, |o| {
            seq(o, a, 3);
            o.push_str(" ++ ");
            seq(o, b, 4);
        }),
        SeqTerm::Sub(a, k1, k2) => {
            seq(out, a, 5);
            let _ = write!(out, "[{k1}:{k2}]");
        }
        SeqTerm::Rev(a) => {
            out.push_str("rev(");
            seq(out, a, 0);
            out.push(')');
        }
    }
}

fn int(out: &mut String, t: &IntTerm, ctx: u8) {
    match t {
        IntTerm::Zero => out.push('0'),
        IntTerm::One => out.push('1'),
        IntTerm::Const(k) => {
            let _ = write!(out, "{k}");
        }
        IntTerm::Seq(s) => seq(out, s, ctx),
        IntTerm::Add(a, b) => paren(out, 2 < ctx, |o| {
            int(o, a, 2);
            o.push_str(" + ");
            int(o, b, 3);
        }),
        IntTerm::Sub(a, b) => paren(out, 2 < ctx, |o| {
            int(o, a, 2);
            o.push_str(" - ");
            int(o, b, 3);
        }),
    }
}

// Regex precedence: union 1, concat 2, postfix 3, base 4.
fn regex(out: &mut String, r: &Regex, ctx: u8) {
    match r {
        Regex::Eps => out.push_str("eps"),
        Regex::Lit(k) => {
            let _ = write!(out, "{k}");
        }
        Regex::AnyInt => out.push_str("INT"),
        Regex::Set(items) => {
            out.push('{');
            for (i, k) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{k}");
            }
            out.push('}');
        }
        Regex::Union(a, b) => paren(out, 1 < ctx, |o| {
            regex(o, a, 1);
            o.push_str(" | ");
            regex(o, b, 2);
        }),
        Regex::Concat(a, b) => paren(out, 2 < ctx, |o| {
            regex(o, a, 2);
            o.push(' ');
            regex(o, b, 3);
        }),
        Regex::Star(a) => {
            regex(out, a, 4);
            out.push('*');
        }
        Regex::Plus(a) => {
            regex(out, a, 4);
            out.push('+');
        }
        Regex::Power(a, n) => {
            regex(out, a, 4);
            let _ = write!(out, "^{n}");
        }
    }
}

fn paren(out: &mut String, wrap: bool, body: impl FnOnce(&mut String)) {
    if wrap {
        out.push('(');
    }
    body(out);
    if wrap {
        out.push(')');
    }
}
