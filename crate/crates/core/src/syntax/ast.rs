use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

/// A term denoting an integer sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeqTerm {
    Var(String),
    Empty,
    /// An integer in sequence position: the singleton holding its value.
    Int(Box<IntTerm>),
    Concat(Box<SeqTerm>, Box<SeqTerm>),
    /// `base[k1:k2]` with literal bounds.
    Sub(Box<SeqTerm>, i64, i64),
    /// Reversal; only produced by program VCs.
    Rev(Box<SeqTerm>),
}

/// A term denoting an integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntTerm {
    Zero,
    One,
    Const(i64),
    /// A sequence in integer position: its first element, or 0 when empty.
    Seq(Box<SeqTerm>),
    Add(Box<IntTerm>, Box<IntTerm>),
    Sub(Box<IntTerm>, Box<IntTerm>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn holds(self, a: i128, b: i128) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }

    pub fn int_token(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    pub fn len_token(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            other => other.int_token(),
        }
    }
}

/// Regular expressions over the integer alphabet.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regex {
    Eps,
    Lit(i64),
    /// The whole set of integers.
    AnyInt,
    Set(Vec<i64>),
    Union(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Power(Box<Regex>, u32),
}

impl Regex {
    pub fn union(a: Regex, b: Regex) -> Regex {
        Regex::Union(Box::new(a), Box::new(b))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex) -> Regex {
        Regex::Star(Box::new(a))
    }

    pub fn power(a: Regex, n: u32) -> Regex {
        Regex::Power(Box::new(a), n)
    }

    pub fn size(&self) -> usize {
        match self {
            Regex::Eps | Regex::Lit(_) | Regex::AnyInt => 1,
            Regex::Set(v) => 1 + v.len(),
            Regex::Union(a, b) | Regex::Concat(a, b) => 1 + a.size() + b.size(),
            Regex::Star(a) | Regex::Plus(a) | Regex::Power(a, _) => 1 + a.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    SeqEq(SeqTerm, SeqTerm),
    InRegex(SeqTerm, Regex),
    IntCmp(Rel, IntTerm, IntTerm),
    /// `len(x) rel k`.
    LenCmp(SeqTerm, Rel, u64),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Matrix {
    True,
    False,
    Atom(Atom),
    Not(Box<Matrix>),
    And(Box<Matrix>, Box<Matrix>),
    Or(Box<Matrix>, Box<Matrix>),
    Imp(Box<Matrix>, Box<Matrix>),
    Iff(Box<Matrix>, Box<Matrix>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quant {
    Forall,
    Exists,
}

impl Quant {
    pub fn dual(self) -> Quant {
        match self {
            Quant::Forall => Quant::Exists,
            Quant::Exists => Quant::Forall,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Quant::Forall => "forall",
            Quant::Exists => "exists",
        }
    }
}

/// A prenex formula. The prefix is homogeneous (all `forall` or all
/// `exists`) or empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Formula {
    pub prefix: Vec<(Quant, String)>,
    pub matrix: Matrix,
}

impl Formula {
    pub fn quantifier_free(matrix: Matrix) -> Formula {
        Formula {
            prefix: Vec::new(),
            matrix,
        }
    }

    /// The quantifier of the prefix, if any.
    pub fn quant(&self) -> Option<Quant> {
        self.prefix.first().map(|(q, _)| *q)
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        self.prefix.iter().map(|(_, v)| v.clone()).collect()
    }

    /// Number of AST nodes, the size measure used for blow-up accounting.
    pub fn size(&self) -> usize {
        self.prefix.len() + self.matrix.size()
    }
}

// ---------------------------------------------------------------------------
// Constructors

impl SeqTerm {
    pub fn var(name: &str) -> SeqTerm {
        SeqTerm::Var(name.into())
    }

    pub fn concat(a: SeqTerm, b: SeqTerm) -> SeqTerm {
        SeqTerm::Concat(Box::new(a), Box::new(b))
    }

    pub fn sub(a: SeqTerm, k1: i64, k2: i64) -> SeqTerm {
        SeqTerm::Sub(Box::new(a), k1, k2)
    }

    pub fn rev(a: SeqTerm) -> SeqTerm {
        SeqTerm::Rev(Box::new(a))
    }

    pub fn int(t: IntTerm) -> SeqTerm {
        SeqTerm::Int(Box::new(t))
    }

    pub fn size(&self) -> usize {
        match self {
            SeqTerm::Var(_) | SeqTerm::Empty => 1,
            SeqTerm::Int(t) => 1 + t.size(),
            SeqTerm::Concat(a, b) => 1 + a.size() + b.size(),
            SeqTerm::Sub(a, _, _) | SeqTerm::Rev(a) => 1 + a.size(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            SeqTerm::Var(v) => {
                out.insert(v.clone());
            }
            SeqTerm::Empty => {}
            SeqTerm::Int(t) => t.collect_vars(out),
            SeqTerm::Concat(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            SeqTerm::Sub(a, _, _) | SeqTerm::Rev(a) => a.collect_vars(out),
        }
    }
}

impl IntTerm {
    pub fn seq(s: SeqTerm) -> IntTerm {
        IntTerm::Seq(Box::new(s))
    }

    pub fn var(name: &str) -> IntTerm {
        IntTerm::seq(SeqTerm::var(name))
    }

    pub fn add(a: IntTerm, b: IntTerm) -> IntTerm {
        IntTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: IntTerm, b: IntTerm) -> IntTerm {
        IntTerm::Sub(Box::new(a), Box::new(b))
    }

    /// The canonical literal node for `k`.
    pub fn lit(k: i64) -> IntTerm {
        match k {
            0 => IntTerm::Zero,
            1 => IntTerm::One,
            k => IntTerm::Const(k),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            IntTerm::Zero | IntTerm::One | IntTerm::Const(_) => 1,
            IntTerm::Seq(s) => 1 + s.size(),
            IntTerm::Add(a, b) | IntTerm::Sub(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            IntTerm::Zero | IntTerm::One | IntTerm::Const(_) => {}
            IntTerm::Seq(s) => s.collect_vars(out),
            IntTerm::Add(a, b) | IntTerm::Sub(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl Atom {
    pub fn size(&self) -> usize {
        match self {
            Atom::SeqEq(a, b) => 1 + a.size() + b.size(),
            Atom::InRegex(a, r) => 1 + a.size() + r.size(),
            Atom::IntCmp(_, a, b) => 1 + a.size() + b.size(),
            Atom::LenCmp(a, _, _) => 2 + a.size(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Atom::SeqEq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Atom::InRegex(a, _) | Atom::LenCmp(a, _, _) => a.collect_vars(out),
            Atom::IntCmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl Matrix {
    pub fn atom(a: Atom) -> Matrix {
        Matrix::Atom(a)
    }

    pub fn not(a: Matrix) -> Matrix {
        Matrix::Not(Box::new(a))
    }

    pub fn and(a: Matrix, b: Matrix) -> Matrix {
        Matrix::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Matrix, b: Matrix) -> Matrix {
        Matrix::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Matrix, b: Matrix) -> Matrix {
        Matrix::Imp(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Matrix, b: Matrix) -> Matrix {
        Matrix::Iff(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn and_all<I: IntoIterator<Item = Matrix>>(items: I) -> Matrix {
        let mut it = items.into_iter();
        match it.next() {
            None => Matrix::True,
            Some(first) => it.fold(first, Matrix::and),
        }
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn or_all<I: IntoIterator<Item = Matrix>>(items: I) -> Matrix {
        let mut it = items.into_iter();
        match it.next() {
            None => Matrix::False,
            Some(first) => it.fold(first, Matrix::or),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Matrix::True | Matrix::False => 1,
            Matrix::Atom(a) => a.size(),
            Matrix::Not(a) => 1 + a.size(),
            Matrix::And(a, b) | Matrix::Or(a, b) | Matrix::Imp(a, b) | Matrix::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Matrix::True | Matrix::False => {}
            Matrix::Atom(a) => a.collect_vars(out),
            Matrix::Not(a) => a.collect_vars(out),
            Matrix::And(a, b) | Matrix::Or(a, b) | Matrix::Imp(a, b) | Matrix::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Visits every atom in left-to-right order.
    pub fn for_each_atom<'a>(&'a self, f: &mut dyn FnMut(&'a Atom)) {
        match self {
            Matrix::True | Matrix::False => {}
            Matrix::Atom(a) => f(a),
            Matrix::Not(a) => a.for_each_atom(f),
            Matrix::And(a, b) | Matrix::Or(a, b) | Matrix::Imp(a, b) | Matrix::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    /// Rebuilds the matrix with every atom replaced by `f(atom)`.
    pub fn map_atoms<E>(&self, f: &mut dyn FnMut(&Atom) -> Result<Matrix, E>) -> Result<Matrix, E> {
        Ok(match self {
            Matrix::True => Matrix::True,
            Matrix::False => Matrix::False,
            Matrix::Atom(a) => f(a)?,
            Matrix::Not(a) => Matrix::not(a.map_atoms(f)?),
            Matrix::And(a, b) => Matrix::and(a.map_atoms(f)?, b.map_atoms(f)?),
            Matrix::Or(a, b) => Matrix::or(a.map_atoms(f)?, b.map_atoms(f)?),
            Matrix::Imp(a, b) => Matrix::imp(a.map_atoms(f)?, b.map_atoms(f)?),
            Matrix::Iff(a, b) => Matrix::iff(a.map_atoms(f)?, b.map_atoms(f)?),
        })
    }
}

/// Variables occurring in the matrix and not bound by the prefix.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    let bound = f.bound_vars();
    f.matrix
        .vars()
        .into_iter()
        .filter(|v| !bound.contains(v))
        .collect()
}
