//! Minimal complete DFAs over the four-letter alphabet `{a, b, c, d}`.
//!
//! Automata are kept minimal with states numbered in breadth-first order
//! from the start state, so structural equality is language equality.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

pub type Letter = u8;

pub const A: Letter = 0;
pub const B: Letter = 1;
pub const C: Letter = 2;
pub const D: Letter = 3;
pub const LETTERS: [Letter; 4] = [A, B, C, D];

pub fn letter_char(l: Letter) -> char {
    (b'a' + l) as char
}

/// Regular expressions over letters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum WordRegex {
    Nothing,
    Eps,
    Letter(Letter),
    Union(Vec<WordRegex>),
    Concat(Vec<WordRegex>),
    Star(alloc::boxed::Box<WordRegex>),
}

impl WordRegex {
    pub fn word(w: &[Letter]) -> WordRegex {
        WordRegex::Concat(w.iter().map(|&l| WordRegex::Letter(l)).collect())
    }

    pub fn star(r: WordRegex) -> WordRegex {
        WordRegex::Star(alloc::boxed::Box::new(r))
    }

    pub fn plus(r: WordRegex) -> WordRegex {
        WordRegex::Concat(vec![r.clone(), WordRegex::star(r)])
    }

    pub fn to_dfa(&self) -> Dfa {
        let mut nfa = Nfa::default();
        let start = nfa.add();
        let end = nfa.add();
        nfa.build(self, start, end);
        nfa.determinize(start, end)
    }
}

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    steps: Vec<Vec<(Letter, usize)>>,
}

impl Nfa {
    fn add(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.steps.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, r: &WordRegex, from: usize, to: usize) {
        match r {
            WordRegex::Nothing => {}
            WordRegex::Eps => self.eps[from].push(to),
            WordRegex::Letter(l) => self.steps[from].push((*l, to)),
            WordRegex::Union(items) => {
                for item in items {
                    self.build(item, from, to);
                }
            }
            WordRegex::Concat(items) => {
                let mut cur = from;
                for (i, item) in items.iter().enumerate() {
                    let next = if i + 1 == items.len() { to } else { self.add() };
                    self.build(item, cur, next);
                    cur = next;
                }
                if items.is_empty() {
                    self.eps[from].push(to);
                }
            }
            WordRegex::Star(inner) => {
                let hub = self.add();
                self.eps[from].push(hub);
                self.eps[hub].push(to);
                let back = self.add();
                self.build(inner, hub, back);
                self.eps[back].push(hub);
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    fn determinize(&self, start: usize, end: usize) -> Dfa {
        let mut init = BTreeSet::new();
        init.insert(start);
        self.closure(&mut init);
        let mut index: BTreeMap<BTreeSet<usize>, u32> = BTreeMap::new();
        let mut sets = vec![init.clone()];
        index.insert(init, 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let mut row = [0u32; 4];
            for l in LETTERS {
                let mut next = BTreeSet::new();
                for &s in &sets[i] {
                    for &(m, t) in &self.steps[s] {
                        if m == l {
                            next.insert(t);
                        }
                    }
                }
                self.closure(&mut next);
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as u32;
                        index.insert(next.clone(), id);
                        sets.push(next);
                        id
                    }
                };
                row[l as usize] = id;
            }
            trans.push(row);
            i += 1;
        }
        let accept = sets.iter().map(|s| s.contains(&end)).collect();
        Dfa::canonical(trans, accept, 0)
    }
}

/// A minimal complete DFA; state 0 is the start state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dfa {
    trans: Vec<[u32; 4]>,
    accept: Vec<bool>,
}

impl Dfa {
    pub fn nothing() -> Dfa {
        Dfa {
            trans: vec![[0; 4]],
            accept: vec![false],
        }
    }

    /// All words, `Σ*`.
    pub fn everything() -> Dfa {
        Dfa {
            trans: vec![[0; 4]],
            accept: vec![true],
        }
    }

    pub fn word(w: &[Letter]) -> Dfa {
        WordRegex::word(w).to_dfa()
    }

    pub fn states(&self) -> usize {
        self.trans.len()
    }

    pub fn step(&self, q: usize, l: Letter) -> usize {
        self.trans[q][l as usize] as usize
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accept[q]
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        self.accept[w.iter().fold(0, |q, &l| self.step(q, l))]
    }

    pub fn is_empty(&self) -> bool {
        !self.accept.iter().any(|&a| a)
    }

    pub fn accepts_empty_word(&self) -> bool {
        self.accept[0]
    }

    pub fn is_universal(&self) -> bool {
        self.accept.iter().all(|&a| a)
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            trans: self.trans.clone(),
            accept: self.accept.iter().map(|a| !a).collect(),
        }
    }

    fn product(&self, other: &Dfa, op: impl Fn(bool, bool) -> bool) -> Dfa {
        let mut index: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut pairs = vec![(0u32, 0u32)];
        index.insert((0, 0), 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            let mut row = [0u32; 4];
            for l in 0..4 {
                let next = (self.trans[p as usize][l], other.trans[q as usize][l]);
                row[l] = *index.entry(next).or_insert_with(|| {
                    pairs.push(next);
                    pairs.len() as u32 - 1
                });
            }
            trans.push(row);
            i += 1;
        }
        let accept = pairs
            .iter()
            .map(|&(p, q)| op(self.accept[p as usize], other.accept[q as usize]))
            .collect();
        Dfa::canonical(trans, accept, 0)
    }

    pub fn intersect(&self, other: &Dfa) -> Dfa {
        if self.is_universal() || other.is_empty() {
            return other.clone();
        }
        if other.is_universal() || self.is_empty() {
            return self.clone();
        }
        self.product(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Dfa) -> Dfa {
        self.product(other, |a, b| a || b)
    }

    /// Whether the language of `self` is contained in that of `other`.
    pub fn subset_of(&self, other: &Dfa) -> bool {
        self.product(other, |a, b| a && !b).is_empty()
    }

    /// Words leading from state `from` into one of the states in `to`.
    pub fn between(&self, from: usize, to: &[usize]) -> Dfa {
        let mut accept = vec![false; self.trans.len()];
        for &q in to {
            accept[q] = true;
        }
        Dfa::canonical(self.trans.clone(), accept, from)
    }

    /// The language from state `from` with the original accepting states.
    pub fn from_state(&self, from: usize) -> Dfa {
        Dfa::canonical(self.trans.clone(), self.accept.clone(), from)
    }

    /// `{w | l w ∈ L}`.
    pub fn derivative(&self, l: Letter) -> Dfa {
        self.from_state(self.step(0, l))
    }

    /// States from which an accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let n = self.trans.len();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (p, row) in self.trans.iter().enumerate() {
            for &q in row {
                rev[q as usize].push(p);
            }
        }
        let mut live = self.accept.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    /// A shortest accepted word, least in letter order among those.
    pub fn shortest_word(&self) -> Option<Vec<Letter>> {
        let n = self.trans.len();
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(q) = queue.pop_front() {
            if self.accept[q] {
                let mut w = Vec::new();
                let mut cur = q;
                while let Some((p, l)) = parent[cur] {
                    w.push(l);
                    cur = p;
                }
                w.reverse();
                return Some(w);
            }
            for l in LETTERS {
                let t = self.step(q, l);
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, l));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn min_len(&self) -> Option<usize> {
        self.shortest_word().map(|w| w.len())
    }

    /// Longest accepted length; `None` when unbounded or empty.
    pub fn max_len(&self) -> Option<usize> {
        let live = self.live_states();
        if !live[0] {
            return None;
        }
        let n = self.trans.len();
        // longest path over live states; a live cycle makes it unbounded
        let mut memo: Vec<Option<usize>> = vec![None; n];
        let mut on_stack = vec![false; n];
        fn go(
            d: &Dfa,
            q: usize,
            live: &[bool],
            memo: &mut [Option<usize>],
            on_stack: &mut [bool],
        ) -> Result<usize, ()> {
            if let Some(v) = memo[q] {
                return Ok(v);
            }
            if on_stack[q] {
                return Err(());
            }
            on_stack[q] = true;
            let mut best = 0;
            for l in LETTERS {
                let t = d.step(q, l);
                if live[t] {
                    best = best.max(1 + go(d, t, live, memo, on_stack)?);
                }
            }
            on_stack[q] = false;
            memo[q] = Some(best);
            Ok(best)
        }
        go(self, 0, &live, &mut memo, &mut on_stack).ok()
    }

    /// The single word of a one-word language.
    pub fn single_word(&self) -> Option<Vec<Letter>> {
        let w = self.shortest_word()?;
        if self.max_len() == Some(w.len()) && *self == Dfa::word(&w) {
            Some(w)
        } else {
            None
        }
    }

    /// Trims to the part reachable from `start`, minimizes and renumbers.
    fn canonical(trans: Vec<[u32; 4]>, accept: Vec<bool>, start: usize) -> Dfa {
        // reachable states
        let n = trans.len();
        let mut seen = vec![false; n];
        let mut order = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < order.len() {
            for &t in &trans[order[i]] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    order.push(t as usize);
                }
            }
            i += 1;
        }
        // Moore refinement over reachable states
        let mut class = vec![0u32; n];
        for &q in &order {
            class[q] = accept[q] as u32;
        }
        let mut count = {
            let kinds: BTreeSet<u32> = order.iter().map(|&q| class[q]).collect();
            kinds.len()
        };
        loop {
            let mut sig_index: BTreeMap<(u32, [u32; 4]), u32> = BTreeMap::new();
            let mut next = vec![0u32; n];
            for &q in &order {
                let mut sig = [0u32; 4];
                for l in 0..4 {
                    sig[l] = class[trans[q][l] as usize];
                }
                let len = sig_index.len() as u32;
                next[q] = *sig_index.entry((class[q], sig)).or_insert(len);
            }
            let new_count = sig_index.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // renumber classes breadth-first from the start
        let mut number: BTreeMap<u32, u32> = BTreeMap::new();
        let mut rep: Vec<usize> = Vec::new();
        number.insert(class[start], 0);
        rep.push(start);
        let mut i = 0;
        while i < rep.len() {
            let q = rep[i];
            for l in 0..4 {
                let c = class[trans[q][l] as usize];
                if !number.contains_key(&c) {
                    number.insert(c, rep.len() as u32);
                    rep.push(trans[q][l] as usize);
                }
            }
            i += 1;
        }
        let new_trans = rep
            .iter()
            .map(|&q| {
                let mut row = [0u32; 4];
                for l in 0..4 {
                    row[l] = number[&class[trans[q][l] as usize]];
                }
                row
            })
            .collect();
        let new_accept = rep.iter().map(|&q| accept[q]).collect();
        Dfa {
            trans: new_trans,
            accept: new_accept,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rx(s: &str) -> WordRegex {
        // tiny test syntax: letters, `*` after a letter, `|` at top level
        WordRegex::Union(
            s.split('|')
                .map(|alt| {
                    let mut items = Vec::new();
                    for ch in alt.chars() {
                        if ch == '*' {
                            let last = items.pop().unwrap();
                            items.push(WordRegex::star(last));
                        } else {
                            items.push(WordRegex::Letter(ch as u8 - b'a'));
                        }
                    }
                    WordRegex::Concat(items)
                })
                .collect(),
        )
    }

    fn w(s: &str) -> Vec<Letter> {
        s.bytes().map(|b| b - b'a').collect()
    }

    #[test]
    fn membership() {
        let d = rx("acb*a|adbb*a").to_dfa();
        for good in ["aca", "acbba", "adba"] {
            assert!(d.accepts(&w(good)), "{good}");
        }
        for bad in ["", "ada", "acb", "aacaa"] {
            assert!(!d.accepts(&w(bad)), "{bad}");
        }
    }

    #[test]
    fn canonical_forms_coincide() {
        assert_eq!(rx("ab*|abb*").to_dfa(), rx("ab*").to_dfa());
        assert_eq!(rx("a*a|a").to_dfa(), rx("aa*").to_dfa());
        assert_ne!(rx("a*").to_dfa(), rx("aa*").to_dfa());
        assert_eq!(Dfa::nothing(), WordRegex::Nothing.to_dfa());
    }

    #[test]
    fn boolean_operations() {
        let x = rx("a*b").to_dfa();
        let y = rx("ab*").to_dfa();
        assert_eq!(x.intersect(&y), Dfa::word(&w("ab")));
        assert!(x.intersect(&x.complement()).is_empty());
        assert!(x.union(&x.complement()).is_universal());
        assert!(Dfa::word(&w("aab")).subset_of(&x));
        assert!(!y.subset_of(&x));
    }

    #[test]
    fn lengths_and_words() {
        let d = rx("abc|ab*").to_dfa();
        assert_eq!(d.shortest_word(), Some(w("a")));
        assert_eq!(d.max_len(), None);
        let e = rx("abc|ab|d").to_dfa();
        assert_eq!(e.min_len(), Some(1));
        assert_eq!(e.max_len(), Some(3));
        assert_eq!(Dfa::nothing().min_len(), None);
        assert_eq!(rx("cab").to_dfa().single_word(), Some(w("cab")));
        assert_eq!(e.single_word(), None);
    }

    #[test]
    fn derivatives_and_slices() {
        let d = rx("acb*a").to_dfa();
        assert_eq!(d.derivative(A), rx("cb*a").to_dfa());
        assert!(d.derivative(B).is_empty());
        // words from the start to the state reached after "ac"
        let q = d.step(d.step(0, A), C);
        assert_eq!(d.between(0, &[q]), rx("acb*").to_dfa());
        assert_eq!(d.from_state(q), rx("b*a").to_dfa());
    }
}
