//! Compilation of core formulas into word problems over `{a, b, c, d}`.
//!
//! An integer `k >= 0` is the word `a c b^k a`, a negative one `a d b^-k a`,
//! and a sequence is the concatenation of its elements' words. Arithmetic
//! on first elements is rewritten into equations on the head `h = a s m a`
//! of each variable, where `s` is the sign letter and `m` the unary modulus.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::automata::{Dfa, Letter, WordRegex, A, B, C, D};
use crate::elaborate::{
    apply_reversal_axioms, expand_shorthands_as, CoreFormula, ElaborationError, FreshNames,
};
use crate::syntax::{free_vars, print_formula, Atom, Formula, IntTerm, Matrix, Quant, Regex, Rel, SeqTerm};

// ---------------------------------------------------------------------------
// Integer codec

pub fn encode_int(k: i64) -> Vec<Letter> {
    let mut w = vec![A, if k >= 0 { C } else { D }];
    w.extend(core::iter::repeat(B).take(k.unsigned_abs() as usize));
    w.push(A);
    w
}

pub fn encode_seq(v: &[i64]) -> Vec<Letter> {
    v.iter().flat_map(|&k| encode_int(k)).collect()
}

/// The word is not a concatenation of integer codes; `position` is the
/// offset of the first letter that does not fit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeError {
    pub position: usize,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not an integer-sequence code (offset {})", self.position)
    }
}

impl core::error::Error for DecodeError {}

pub fn decode_word(w: &[Letter]) -> Result<Vec<i64>, DecodeError> {
    let mut out = Vec::new();
    let mut i = 0;
    let expect = |i: usize, l: Letter| {
        if w.get(i) == Some(&l) {
            Ok(())
        } else {
            Err(DecodeError { position: i })
        }
    };
    while i < w.len() {
        expect(i, A)?;
        let negative = match w.get(i + 1) {
            Some(&C) => false,
            Some(&D) => true,
            _ => return Err(DecodeError { position: i + 1 }),
        };
        i += 2;
        let mut n: i64 = 0;
        while w.get(i) == Some(&B) {
            n += 1;
            i += 1;
        }
        expect(i, A)?;
        if negative && n == 0 {
            return Err(DecodeError { position: i });
        }
        out.push(if negative { -n } else { n });
        i += 1;
    }
    Ok(out)
}

/// `acb*a ∪ adb+a`, the codes of single integers.
pub fn int_code_regex() -> WordRegex {
    let b = || WordRegex::Letter(B);
    WordRegex::Union(vec![
        WordRegex::Concat(vec![
            WordRegex::Letter(A),
            WordRegex::Letter(C),
            WordRegex::star(b()),
            WordRegex::Letter(A),
        ]),
        WordRegex::Concat(vec![
            WordRegex::Letter(A),
            WordRegex::Letter(D),
            WordRegex::plus(b()),
            WordRegex::Letter(A),
        ]),
    ])
}

fn word_regex(r: &Regex) -> WordRegex {
    match r {
        Regex::Eps => WordRegex::Eps,
        Regex::Lit(k) => WordRegex::word(&encode_int(*k)),
        Regex::AnyInt => int_code_regex(),
        Regex::Set(items) => {
            WordRegex::Union(items.iter().map(|&k| WordRegex::word(&encode_int(k))).collect())
        }
        Regex::Union(a, b) => WordRegex::Union(vec![word_regex(a), word_regex(b)]),
        Regex::Concat(a, b) => WordRegex::Concat(vec![word_regex(a), word_regex(b)]),
        Regex::Star(a) => WordRegex::star(word_regex(a)),
        Regex::Plus(a) => WordRegex::plus(word_regex(a)),
        Regex::Power(a, n) => {
            let inner = word_regex(a);
            WordRegex::Concat((0..*n).map(|_| inner.clone()).collect())
        }
    }
}

/// Retargets an integer regular expression to the codes of its words.
pub fn encode_regex(r: &Regex) -> Dfa {
    word_regex(r).to_dfa()
}

fn seq_codes() -> Dfa {
    WordRegex::star(int_code_regex()).to_dfa()
}

// ---------------------------------------------------------------------------
// Word problems

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Var(String),
    Letter(Letter),
}

pub type Word = Vec<Sym>;

pub fn letters(w: &[Letter]) -> Word {
    w.iter().map(|&l| Sym::Letter(l)).collect()
}

fn var(x: &str) -> Sym {
    Sym::Var(x.into())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordAtom {
    Eq(Word, Word),
    In(String, Dfa),
}

impl WordAtom {
    /// An equation, folded to a membership or a constant where possible.
    pub fn eq(l: Word, r: Word) -> WordFormula {
        let ground = |w: &Word| -> Option<Vec<Letter>> {
            w.iter()
                .map(|s| match s {
                    Sym::Letter(l) => Some(*l),
                    Sym::Var(_) => None,
                })
                .collect()
        };
        match (ground(&l), ground(&r)) {
            (Some(a), Some(b)) => WordFormula::constant(a == b),
            (Some(w), None) if r.len() == 1 => WordFormula::member(&r[0], Dfa::word(&w)),
            (None, Some(w)) if l.len() == 1 => WordFormula::member(&l[0], Dfa::word(&w)),
            _ => WordFormula::Atom(WordAtom::Eq(l, r)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            WordAtom::Eq(l, r) => 1 + l.len() + r.len(),
            WordAtom::In(..) => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordFormula {
    True,
    False,
    Atom(WordAtom),
    Not(Box<WordFormula>),
    And(Vec<WordFormula>),
    Or(Vec<WordFormula>),
    Imp(Box<WordFormula>, Box<WordFormula>),
    Iff(Box<WordFormula>, Box<WordFormula>),
}

impl WordFormula {
    pub fn constant(b: bool) -> WordFormula {
        if b {
            WordFormula::True
        } else {
            WordFormula::False
        }
    }

    fn member(s: &Sym, d: Dfa) -> WordFormula {
        match s {
            Sym::Var(x) => WordFormula::Atom(WordAtom::In(x.clone(), d)),
            Sym::Letter(l) => WordFormula::constant(d.accepts(&[*l])),
        }
    }

    pub fn is_in(x: &str, d: Dfa) -> WordFormula {
        WordFormula::Atom(WordAtom::In(x.into(), d))
    }

    pub fn not(a: WordFormula) -> WordFormula {
        WordFormula::Not(Box::new(a))
    }

    pub fn imp(a: WordFormula, b: WordFormula) -> WordFormula {
        WordFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn size(&self) -> usize {
        match self {
            WordFormula::True | WordFormula::False => 1,
            WordFormula::Atom(a) => a.size(),
            WordFormula::Not(a) => 1 + a.size(),
            WordFormula::And(xs) | WordFormula::Or(xs) => {
                1 + xs.iter().map(WordFormula::size).sum::<usize>()
            }
            WordFormula::Imp(a, b) | WordFormula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Visits atoms together with their polarity (`true` when positive).
    pub fn for_each_atom<'a>(&'a self, positive: bool, f: &mut dyn FnMut(&'a WordAtom, bool)) {
        match self {
            WordFormula::True | WordFormula::False => {}
            WordFormula::Atom(a) => f(a, positive),
            WordFormula::Not(a) => a.for_each_atom(!positive, f),
            WordFormula::And(xs) | WordFormula::Or(xs) => {
                for x in xs {
                    x.for_each_atom(positive, f);
                }
            }
            WordFormula::Imp(a, b) => {
                a.for_each_atom(!positive, f);
                b.for_each_atom(positive, f);
            }
            WordFormula::Iff(a, b) => {
                a.for_each_atom(positive, f);
                a.for_each_atom(!positive, f);
                b.for_each_atom(positive, f);
                b.for_each_atom(!positive, f);
            }
        }
    }

    /// Ground truth value; `None` if a variable is unassigned.
    pub fn eval(&self, env: &BTreeMap<String, Vec<Letter>>) -> Option<bool> {
        let word = |w: &Word| -> Option<Vec<Letter>> {
            let mut out = Vec::new();
            for s in w {
                match s {
                    Sym::Letter(l) => out.push(*l),
                    Sym::Var(x) => out.extend(env.get(x)?),
                }
            }
            Some(out)
        };
        Some(match self {
            WordFormula::True => true,
            WordFormula::False => false,
            WordFormula::Atom(WordAtom::Eq(l, r)) => word(l)? == word(r)?,
            WordFormula::Atom(WordAtom::In(x, d)) => d.accepts(env.get(x)?),
            WordFormula::Not(a) => !a.eval(env)?,
            WordFormula::And(xs) => {
                let mut all = true;
                for x in xs {
                    all &= x.eval(env)?;
                }
                all
            }
            WordFormula::Or(xs) => {
                let mut any = false;
                for x in xs {
                    any |= x.eval(env)?;
                }
                any
            }
            WordFormula::Imp(a, b) => !a.eval(env)? || b.eval(env)?,
            WordFormula::Iff(a, b) => a.eval(env)? == b.eval(env)?,
        })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each_atom(true, &mut |a, _| match a {
            WordAtom::Eq(l, r) => {
                for s in l.iter().chain(r) {
                    if let Sym::Var(x) = s {
                        out.insert(x.clone());
                    }
                }
            }
            WordAtom::In(x, _) => {
                out.insert(x.clone());
            }
        });
        out
    }
}

/// A boolean combination of word equations and regular memberships. Every
/// variable is read with `polarity`: the problem is a validity question
/// under `Forall` and a satisfiability question under `Exists`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordProblem {
    pub polarity: Quant,
    /// Variables of the source formula, whose words decode to sequences.
    pub source_vars: Vec<String>,
    pub vars: BTreeSet<String>,
    pub matrix: WordFormula,
}

impl WordProblem {
    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    fn atoms(&self, want_eq: bool, want_positive: Option<bool>) -> Vec<WordAtom> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.matrix.for_each_atom(true, &mut |a, pos| {
            let is_eq = matches!(a, WordAtom::Eq(..));
            if is_eq == want_eq && want_positive.map_or(true, |p| p == pos) && seen.insert(a) {
                out.push(a.clone());
            }
        });
        out
    }

    /// Equations occurring positively.
    pub fn equations(&self) -> Vec<WordAtom> {
        self.atoms(true, Some(true))
    }

    /// Equations occurring negatively.
    pub fn disequations(&self) -> Vec<WordAtom> {
        self.atoms(true, Some(false))
    }

    pub fn memberships(&self) -> Vec<WordAtom> {
        self.atoms(false, None)
    }
}

// ---------------------------------------------------------------------------
// Errors and options

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EncodeError {
    Elaboration(ElaborationError),
    /// An atom outside the flat forms reached arithmetic elimination.
    NotFlat(String),
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeError::Elaboration(e) => e.fmt(f),
            EncodeError::NotFlat(a) => write!(f, "internal error: atom `{a}` is not flat"),
        }
    }
}

impl core::error::Error for EncodeError {}

impl From<ElaborationError> for EncodeError {
    fn from(e: ElaborationError) -> Self {
        EncodeError::Elaboration(e)
    }
}

/// How head/tail frames are attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FrameStyle {
    /// The two-branch frame on every variable.
    Literal,
    /// A single-branch frame `x aca = h t` on the variables used in
    /// arithmetic only.
    #[default]
    Compact,
}

// ---------------------------------------------------------------------------
// Step 1: flattening

fn guarded(q: Quant, guards: Vec<Matrix>, body: Matrix) -> Matrix {
    match (Matrix::and_all(guards), q) {
        (Matrix::True, _) => body,
        (g, Quant::Forall) => Matrix::imp(g, body),
        (g, Quant::Exists) => Matrix::and(g, body),
    }
}

fn sv(x: &str) -> SeqTerm {
    SeqTerm::var(x)
}

fn iv(x: &str) -> IntTerm {
    IntTerm::var(x)
}

enum SeqTop {
    Var(String),
    Empty,
    Cat(String, String),
}

enum IntTop {
    Var(String),
    Zero,
    One,
    Add(String, String),
    Sub(String, String),
}

struct Flattener {
    fresh: FreshNames,
    guards: Vec<Matrix>,
    new_vars: Vec<String>,
    seq_names: BTreeMap<SeqTerm, String>,
    int_names: BTreeMap<IntTerm, String>,
}

impl Flattener {
    fn fresh(&mut self, stem: &str) -> String {
        let v = self.fresh.next(stem);
        self.new_vars.push(v.clone());
        v
    }

    fn seq_top(&mut self, t: &SeqTerm) -> SeqTop {
        match t {
            SeqTerm::Var(x) => SeqTop::Var(x.clone()),
            SeqTerm::Empty => SeqTop::Empty,
            SeqTerm::Concat(a, b) => SeqTop::Cat(self.seq_var(a), self.seq_var(b)),
            _ => SeqTop::Var(self.seq_var(t)),
        }
    }

    fn seq_atom(x: String, t: SeqTop) -> Matrix {
        let rhs = match t {
            SeqTop::Var(y) => sv(&y),
            SeqTop::Empty => SeqTerm::Empty,
            SeqTop::Cat(y, z) => SeqTerm::concat(sv(&y), sv(&z)),
        };
        Matrix::Atom(Atom::SeqEq(sv(&x), rhs))
    }

    fn seq_var(&mut self, t: &SeqTerm) -> String {
        if let SeqTerm::Var(x) = t {
            return x.clone();
        }
        if let Some(e) = self.seq_names.get(t) {
            return e.clone();
        }
        let e = self.fresh("e");
        let guard = match t {
            SeqTerm::Int(i) => match **i {
                IntTerm::Zero => Matrix::Atom(Atom::InRegex(sv(&e), Regex::Lit(0))),
                IntTerm::One => Matrix::Atom(Atom::InRegex(sv(&e), Regex::Lit(1))),
                IntTerm::Const(k) => Matrix::Atom(Atom::InRegex(sv(&e), Regex::Lit(k))),
                _ => {
                    let x = self.int_var(i);
                    Matrix::and(
                        Matrix::Atom(Atom::InRegex(sv(&e), Regex::AnyInt)),
                        Matrix::Atom(Atom::IntCmp(Rel::Eq, iv(&e), iv(&x))),
                    )
                }
            },
            _ => {
                let top = self.seq_top(t);
                Flattener::seq_atom(e.clone(), top)
            }
        };
        self.guards.push(guard);
        self.seq_names.insert(t.clone(), e.clone());
        e
    }

    fn int_top(&mut self, t: &IntTerm) -> IntTop {
        match t {
            IntTerm::Zero => IntTop::Zero,
            IntTerm::One => IntTop::One,
            IntTerm::Add(a, b) => IntTop::Add(self.int_var(a), self.int_var(b)),
            IntTerm::Sub(a, b) => IntTop::Sub(self.int_var(a), self.int_var(b)),
            _ => IntTop::Var(self.int_var(t)),
        }
    }

    fn int_atom(x: String, t: IntTop) -> Matrix {
        let rhs = match t {
            IntTop::Var(y) => iv(&y),
            IntTop::Zero => IntTerm::Zero,
            IntTop::One => IntTerm::One,
            IntTop::Add(y, z) => IntTerm::add(iv(&y), iv(&z)),
            IntTop::Sub(y, z) => IntTerm::sub(iv(&y), iv(&z)),
        };
        Matrix::Atom(Atom::IntCmp(Rel::Eq, iv(&x), rhs))
    }

    fn int_var(&mut self, t: &IntTerm) -> String {
        match t {
            IntTerm::Seq(s) => return self.seq_var(s),
            IntTerm::Const(_) => return self.seq_var(&SeqTerm::int(t.clone())),
            _ => {}
        }
        if let Some(f) = self.int_names.get(t) {
            return f.clone();
        }
        let f = self.fresh("f");
        let top = self.int_top(t);
        self.guards.push(Flattener::int_atom(f.clone(), top));
        self.int_names.insert(t.clone(), f.clone());
        f
    }

    fn atom(&mut self, a: &Atom) -> Matrix {
        match a {
            Atom::SeqEq(l, r) => match (l, r) {
                (SeqTerm::Empty, SeqTerm::Empty) => Matrix::True,
                (SeqTerm::Empty, t) | (t, SeqTerm::Empty) => {
                    Flattener::seq_atom(self.seq_var(t), SeqTop::Empty)
                }
                _ => {
                    let x = self.seq_var(l);
                    let y = self.seq_var(r);
                    Flattener::seq_atom(x, SeqTop::Var(y))
                }
            },
            Atom::InRegex(s, r) => Matrix::Atom(Atom::InRegex(sv(&self.seq_var(s)), r.clone())),
            Atom::IntCmp(Rel::Lt, l, r) => {
                let x = self.int_var(l);
                let y = self.int_var(r);
                Matrix::Atom(Atom::IntCmp(Rel::Lt, iv(&x), iv(&y)))
            }
            Atom::IntCmp(_, l, r) => match (self.int_top(l), self.int_top(r)) {
                (IntTop::Var(x), t) | (t, IntTop::Var(x)) => Flattener::int_atom(x, t),
                (_, t) => {
                    let x = self.int_var(l);
                    Flattener::int_atom(x, t)
                }
            },
            Atom::LenCmp(..) => unreachable!("length predicates are not core"),
        }
    }
}

/// Names every compound subterm so that each atom takes one of the forms
/// `x = y`, `x = y ++ z`, `x = eps`, `x in R`, `x == 0|1|y|y+z|y-z`, `x < y`.
pub fn flatten(f: &CoreFormula) -> CoreFormula {
    let q = f.polarity();
    let formula = f.formula();
    let mut fl = Flattener {
        fresh: FreshNames::for_formula(formula),
        guards: Vec::new(),
        new_vars: Vec::new(),
        seq_names: BTreeMap::new(),
        int_names: BTreeMap::new(),
    };
    let body = formula
        .matrix
        .map_atoms::<()>(&mut |a| Ok(fl.atom(a)))
        .unwrap_or_else(|_| unreachable!());
    let mut prefix = formula.prefix.clone();
    prefix.extend(fl.new_vars.iter().map(|v| (q, v.clone())));
    let matrix = guarded(q, fl.guards, body);
    CoreFormula::from_parts(Formula { prefix, matrix }, q)
}

// ---------------------------------------------------------------------------
// Step 2: frames

/// Names of the frame of `base`: `base = head tail`, `head = a sign modulus a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedVar {
    pub base: String,
    pub head: String,
    pub tail: String,
    pub sign: String,
    pub modulus: String,
}

impl EncodedVar {
    fn head_shape(&self) -> WordFormula {
        WordAtom::eq(
            vec![var(&self.head)],
            vec![Sym::Letter(A), var(&self.sign), var(&self.modulus), Sym::Letter(A)],
        )
    }

    fn sign_and_modulus(&self) -> Vec<WordFormula> {
        vec![
            WordFormula::is_in(&self.sign, Dfa::word(&[C]).union(&Dfa::word(&[D]))),
            WordFormula::is_in(&self.modulus, WordRegex::star(WordRegex::Letter(B)).to_dfa()),
        ]
    }

    /// The two-branch frame: a nonempty `base` splits into its first code
    /// and the rest; an empty one has head `aca`.
    pub fn literal_constraint(&self) -> WordFormula {
        let mut nonempty = vec![
            WordAtom::eq(vec![var(&self.base)], vec![var(&self.head), var(&self.tail)]),
            self.head_shape(),
        ];
        nonempty.extend(self.sign_and_modulus());
        nonempty.push(WordFormula::is_in(&self.tail, seq_codes()));
        let empty = vec![
            WordAtom::eq(vec![var(&self.base)], vec![]),
            self.head_shape(),
            WordAtom::eq(vec![var(&self.sign)], vec![Sym::Letter(C)]),
            WordAtom::eq(vec![var(&self.modulus)], vec![]),
            WordAtom::eq(vec![var(&self.tail)], vec![]),
        ];
        WordFormula::Or(vec![WordFormula::And(nonempty), WordFormula::And(empty)])
    }

    /// `base aca = head tail` with the same head shape; padding with the
    /// code of 0 makes the empty case coincide with the general one.
    pub fn compact_constraint(&self) -> WordFormula {
        let mut lhs = vec![var(&self.base)];
        lhs.extend(letters(&encode_int(0)));
        let mut parts = vec![
            WordAtom::eq(lhs, vec![var(&self.head), var(&self.tail)]),
            self.head_shape(),
        ];
        parts.extend(self.sign_and_modulus());
        parts.push(WordFormula::is_in(&self.tail, seq_codes()));
        WordFormula::And(parts)
    }
}

/// Allocates a frame for every variable of `f` and adds the frame
/// variables to the prefix. The constraints themselves are emitted during
/// arithmetic elimination.
pub fn attach_frame(f: &CoreFormula) -> (CoreFormula, BTreeMap<String, EncodedVar>) {
    let q = f.polarity();
    let formula = f.formula();
    let mut fresh = FreshNames::for_formula(formula);
    let mut frames = BTreeMap::new();
    let mut prefix = formula.prefix.clone();
    for x in formula.matrix.vars() {
        let ev = EncodedVar {
            base: x.clone(),
            head: fresh.next("h"),
            tail: fresh.next("t"),
            sign: fresh.next("s"),
            modulus: fresh.next("m"),
        };
        for v in [&ev.head, &ev.tail, &ev.sign, &ev.modulus] {
            prefix.push((q, v.clone()));
        }
        frames.insert(x, ev);
    }
    let out = CoreFormula::from_parts(
        Formula {
            prefix,
            matrix: formula.matrix.clone(),
        },
        q,
    );
    (out, frames)
}

// ---------------------------------------------------------------------------
// Steps 3-7

struct Eliminator<'a> {
    frames: &'a BTreeMap<String, EncodedVar>,
    fresh: FreshNames,
    arithmetic: BTreeSet<String>,
    /// One `p ∈ b+` per unordered pair of variables compared or added.
    pairs: BTreeMap<(String, String), String>,
}

impl<'a> Eliminator<'a> {
    fn frame(&mut self, x: &str) -> Result<EncodedVar, EncodeError> {
        self.arithmetic.insert(x.into());
        self.frames
            .get(x)
            .cloned()
            .ok_or_else(|| EncodeError::NotFlat(alloc::format!("variable {x} has no frame")))
    }

    fn pair(&mut self, i: &str, j: &str) -> String {
        let key = if i <= j { (i.into(), j.into()) } else { (j.into(), i.into()) };
        if let Some(p) = self.pairs.get(&key) {
            return p.clone();
        }
        let p = self.fresh.next("p");
        self.pairs.insert(key, p.clone());
        p
    }

    fn sign_is(x: &EncodedVar, l: Letter) -> WordFormula {
        WordFormula::is_in(&x.sign, Dfa::word(&[l]))
    }

    fn signs_differ(i: &EncodedVar, j: &EncodedVar) -> WordFormula {
        WordFormula::Or(vec![
            WordFormula::And(vec![Self::sign_is(i, C), Self::sign_is(j, D)]),
            WordFormula::And(vec![Self::sign_is(i, D), Self::sign_is(j, C)]),
        ])
    }

    fn lt(&mut self, x: &str, y: &str) -> Result<WordFormula, EncodeError> {
        let i = self.frame(x)?;
        let j = self.frame(y)?;
        let p = self.pair(x, y);
        Ok(WordFormula::Or(vec![
            WordFormula::And(vec![Self::sign_is(&i, D), Self::sign_is(&j, C)]),
            WordFormula::And(vec![
                Self::sign_is(&i, C),
                Self::sign_is(&j, C),
                WordAtom::eq(vec![var(&j.modulus)], vec![var(&i.modulus), var(&p)]),
            ]),
            WordFormula::And(vec![
                Self::sign_is(&i, D),
                Self::sign_is(&j, D),
                WordAtom::eq(vec![var(&i.modulus)], vec![var(&j.modulus), var(&p)]),
            ]),
        ]))
    }

    /// `k = x + y`.
    fn sum(&mut self, k: &str, x: &str, y: &str) -> Result<WordFormula, EncodeError> {
        let hk = self.frame(k)?.head;
        let i = self.frame(x)?;
        let j = self.frame(y)?;
        let p = self.pair(x, y);
        let head = |mid: Vec<Sym>| {
            let mut w = vec![Sym::Letter(A)];
            w.extend(mid);
            w.push(Sym::Letter(A));
            WordAtom::eq(vec![var(&hk)], w)
        };
        Ok(WordFormula::Or(vec![
            WordFormula::And(vec![
                WordAtom::eq(vec![var(&i.sign)], vec![var(&j.sign)]),
                head(vec![var(&i.sign), var(&i.modulus), var(&j.modulus)]),
            ]),
            WordFormula::And(vec![
                Self::signs_differ(&i, &j),
                WordAtom::eq(vec![var(&i.modulus)], vec![var(&j.modulus)]),
                head(vec![Sym::Letter(C)]),
            ]),
            WordFormula::And(vec![
                Self::signs_differ(&i, &j),
                WordAtom::eq(vec![var(&i.modulus)], vec![var(&j.modulus), var(&p)]),
                head(vec![var(&i.sign), var(&p)]),
            ]),
            WordFormula::And(vec![
                Self::signs_differ(&i, &j),
                WordAtom::eq(vec![var(&j.modulus)], vec![var(&i.modulus), var(&p)]),
                head(vec![var(&j.sign), var(&p)]),
            ]),
        ]))
    }

    fn atom(&mut self, a: &Atom) -> Result<WordFormula, EncodeError> {
        let not_flat = || EncodeError::NotFlat(crate::syntax::print_matrix(&Matrix::Atom(a.clone())));
        let name = |t: &IntTerm| match t {
            IntTerm::Seq(s) => match &**s {
                SeqTerm::Var(x) => Some(x.clone()),
                _ => None,
            },
            _ => None,
        };
        match a {
            Atom::SeqEq(SeqTerm::Var(x), rhs) => {
                let r = match rhs {
                    SeqTerm::Var(y) => vec![var(y)],
                    SeqTerm::Empty => vec![],
                    SeqTerm::Concat(y, z) => match (&**y, &**z) {
                        (SeqTerm::Var(y), SeqTerm::Var(z)) => vec![var(y), var(z)],
                        _ => return Err(not_flat()),
                    },
                    _ => return Err(not_flat()),
                };
                Ok(WordAtom::eq(vec![var(x)], r))
            }
            Atom::InRegex(SeqTerm::Var(x), r) => Ok(WordFormula::is_in(x, encode_regex(r))),
            Atom::IntCmp(Rel::Lt, l, r) => match (name(l), name(r)) {
                (Some(x), Some(y)) => self.lt(&x, &y),
                _ => Err(not_flat()),
            },
            Atom::IntCmp(Rel::Eq, l, r) => {
                let x = name(l).ok_or_else(not_flat)?;
                match r {
                    IntTerm::Zero | IntTerm::One => {
                        let h = self.frame(&x)?.head;
                        let k = if *r == IntTerm::Zero { 0 } else { 1 };
                        Ok(WordFormula::is_in(&h, Dfa::word(&encode_int(k))))
                    }
                    IntTerm::Add(y, z) => {
                        let (y, z) = (name(y).ok_or_else(not_flat)?, name(z).ok_or_else(not_flat)?);
                        self.sum(&x, &y, &z)
                    }
                    IntTerm::Sub(y, z) => {
                        // x = y - z  iff  y = x + z
                        let (y, z) = (name(y).ok_or_else(not_flat)?, name(z).ok_or_else(not_flat)?);
                        self.sum(&y, &x, &z)
                    }
                    _ => {
                        let y = name(r).ok_or_else(not_flat)?;
                        let hx = self.frame(&x)?.head;
                        let hy = self.frame(&y)?.head;
                        Ok(WordAtom::eq(vec![var(&hx)], vec![var(&hy)]))
                    }
                }
            }
            _ => Err(not_flat()),
        }
    }

    fn matrix(&mut self, m: &Matrix) -> Result<WordFormula, EncodeError> {
        Ok(match m {
            Matrix::True => WordFormula::True,
            Matrix::False => WordFormula::False,
            Matrix::Atom(a) => self.atom(a)?,
            Matrix::Not(a) => WordFormula::not(self.matrix(a)?),
            Matrix::And(a, b) => WordFormula::And(vec![self.matrix(a)?, self.matrix(b)?]),
            Matrix::Or(a, b) => WordFormula::Or(vec![self.matrix(a)?, self.matrix(b)?]),
            Matrix::Imp(a, b) => WordFormula::imp(self.matrix(a)?, self.matrix(b)?),
            Matrix::Iff(a, b) => {
                WordFormula::Iff(Box::new(self.matrix(a)?), Box::new(self.matrix(b)?))
            }
        })
    }
}

/// Rewrites arithmetic into word constraints on frames and retargets
/// regular constraints. `f` must be flat.
pub fn eliminate_eq_diff_lt_sum(
    f: &CoreFormula,
    frames: &BTreeMap<String, EncodedVar>,
) -> Result<WordProblem, EncodeError> {
    eliminate_with(f, frames, FrameStyle::default(), Vec::new())
}

fn eliminate_with(
    f: &CoreFormula,
    frames: &BTreeMap<String, EncodedVar>,
    style: FrameStyle,
    source_vars: Vec<String>,
) -> Result<WordProblem, EncodeError> {
    let q = f.polarity();
    let formula = f.formula();
    let mut fresh = FreshNames::for_formula(formula);
    for ev in frames.values() {
        for v in [&ev.head, &ev.tail, &ev.sign, &ev.modulus] {
            fresh.reserve(v);
        }
    }
    let mut el = Eliminator {
        frames,
        fresh,
        arithmetic: BTreeSet::new(),
        pairs: BTreeMap::new(),
    };
    let body = el.matrix(&formula.matrix)?;

    let mut guards = Vec::new();
    let codes = seq_codes();
    for x in formula.matrix.vars() {
        guards.push(WordFormula::is_in(&x, codes.clone()));
    }
    for (x, ev) in frames {
        match style {
            FrameStyle::Literal => guards.push(ev.literal_constraint()),
            FrameStyle::Compact if el.arithmetic.contains(x) => {
                guards.push(ev.compact_constraint())
            }
            FrameStyle::Compact => {}
        }
    }
    let b_plus = WordRegex::plus(WordRegex::Letter(B)).to_dfa();
    for ((x, y), p) in &el.pairs {
        let (mx, my) = (&frames[x].modulus, &frames[y].modulus);
        guards.push(WordFormula::is_in(p, b_plus.clone()));
        guards.push(WordFormula::Or(vec![
            WordAtom::eq(vec![var(mx)], vec![var(my)]),
            WordAtom::eq(vec![var(mx)], vec![var(my), var(p)]),
            WordAtom::eq(vec![var(my)], vec![var(mx), var(p)]),
        ]));
    }
    let guards = WordFormula::And(guards);
    let matrix = match q {
        Quant::Forall => WordFormula::imp(guards, body),
        Quant::Exists => WordFormula::And(vec![guards, body]),
    };
    Ok(WordProblem {
        polarity: q,
        source_vars,
        vars: matrix.vars(),
        matrix,
    })
}

/// Elaborates and encodes `f`. The polarity is that of the prefix, or
/// universal for a quantifier-free formula.
pub fn encode(f: &Formula) -> Result<WordProblem, EncodeError> {
    encode_as(f, f.quant().unwrap_or(Quant::Forall), FrameStyle::default())
}

pub fn encode_as(f: &Formula, q: Quant, style: FrameStyle) -> Result<WordProblem, EncodeError> {
    let core = expand_shorthands_as(&apply_reversal_axioms(f), q)?;
    encode_core(&core, free_vars(f).into_iter().chain(f.bound_vars()).collect(), style)
}

/// Steps 1-7 on an elaborated formula; `source_vars` are the variables
/// whose values a witness should report.
pub fn encode_core(
    core: &CoreFormula,
    source_vars: Vec<String>,
    style: FrameStyle,
) -> Result<WordProblem, EncodeError> {
    let flat = flatten(core);
    let (framed, frames) = attach_frame(&flat);
    eliminate_with(&framed, &frames, style, source_vars)
}

/// Printed form of the elaborated formula, for `--stop-after elaborate`.
pub fn elaborate_only(f: &Formula) -> Result<String, EncodeError> {
    let q = f.quant().unwrap_or(Quant::Forall);
    let core = expand_shorthands_as(&apply_reversal_axioms(f), q)?;
    Ok(print_formula(core.formula()).to_string())
}

#[cfg(test)]
mod tests;
