//! Nielsen-transformation search over conjunctions of word equations and
//! regular memberships.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use siphasher::sip128::{Hasher128, SipHasher13};

use super::dnf::{Clause, Literal};
use super::{Budget, BudgetReport, SolverResult, UnknownCause, UnsatReason, Witness};
use crate::automata::{Dfa, Letter, WordRegex, LETTERS};
use crate::encode::{decode_word, Sym};

/// Symbols: values below `VAR0` are letters, the rest variables.
type S = u32;
const VAR0: u32 = 4;

fn is_var(s: S) -> bool {
    s >= VAR0
}

const UNIVERSAL: u32 = 0;
const SIGMA_PLUS: u32 = 1;

struct LangInfo {
    empty: bool,
    eps: bool,
    min: usize,
    max: Option<usize>,
    single: Option<Vec<Letter>>,
    live: Vec<bool>,
}

/// Interned automata with cached operations.
struct Store {
    dfas: Vec<Dfa>,
    info: Vec<LangInfo>,
    index: BTreeMap<Dfa, u32>,
    inter: BTreeMap<(u32, u32), u32>,
    deriv: BTreeMap<(u32, Letter), u32>,
    slices: BTreeMap<(u32, u32, u32), u32>,
    suffixes: BTreeMap<(u32, u32), u32>,
}

impl Store {
    fn new() -> Store {
        let mut s = Store {
            dfas: Vec::new(),
            info: Vec::new(),
            index: BTreeMap::new(),
            inter: BTreeMap::new(),
            deriv: BTreeMap::new(),
            slices: BTreeMap::new(),
            suffixes: BTreeMap::new(),
        };
        s.intern(Dfa::everything());
        let any = WordRegex::Union(LETTERS.iter().map(|&l| WordRegex::Letter(l)).collect());
        s.intern(WordRegex::plus(any).to_dfa());
        s
    }

    fn intern(&mut self, d: Dfa) -> u32 {
        if let Some(&id) = self.index.get(&d) {
            return id;
        }
        let id = self.dfas.len() as u32;
        let min = d.min_len();
        self.info.push(LangInfo {
            empty: d.is_empty(),
            eps: d.accepts_empty_word(),
            min: min.unwrap_or(0),
            max: d.max_len(),
            single: d.single_word(),
            live: d.live_states(),
        });
        self.index.insert(d.clone(), id);
        self.dfas.push(d);
        id
    }

    fn intersect(&mut self, a: u32, b: u32) -> u32 {
        if a == b || b == UNIVERSAL {
            return a;
        }
        if a == UNIVERSAL {
            return b;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&r) = self.inter.get(&key) {
            return r;
        }
        let d = self.dfas[a as usize].intersect(&self.dfas[b as usize]);
        let r = self.intern(d);
        self.inter.insert(key, r);
        r
    }

    /// Nonempty words whose first letter is not `alpha`.
    fn not_starting_with(&mut self, alpha: Letter) -> u32 {
        let others = LETTERS
            .iter()
            .filter(|&&l| l != alpha)
            .map(|&l| WordRegex::Letter(l))
            .collect();
        let any = LETTERS.iter().map(|&l| WordRegex::Letter(l)).collect();
        let r = WordRegex::Concat(vec![
            WordRegex::Union(others),
            WordRegex::star(WordRegex::Union(any)),
        ]);
        self.intern(r.to_dfa())
    }

    fn derivative(&mut self, a: u32, l: Letter) -> u32 {
        if let Some(&r) = self.deriv.get(&(a, l)) {
            return r;
        }
        let d = self.dfas[a as usize].derivative(l);
        let r = self.intern(d);
        self.deriv.insert((a, l), r);
        r
    }

    /// Words leading from state `p` to state `q`.
    fn slice(&mut self, a: u32, p: u32, q: u32) -> u32 {
        if let Some(&r) = self.slices.get(&(a, p, q)) {
            return r;
        }
        let d = self.dfas[a as usize].between(p as usize, &[q as usize]);
        let r = self.intern(d);
        self.slices.insert((a, p, q), r);
        r
    }

    fn suffix(&mut self, a: u32, q: u32) -> u32 {
        if let Some(&r) = self.suffixes.get(&(a, q)) {
            return r;
        }
        let d = self.dfas[a as usize].from_state(q as usize);
        let r = self.intern(d);
        self.suffixes.insert((a, q), r);
        r
    }
}

type Eq = (Vec<S>, Vec<S>);

#[derive(Clone)]
struct Node {
    eqs: Vec<Eq>,
    /// Disequations, kept until a candidate model violates one.
    neqs: Vec<Eq>,
    /// Non-universal languages by variable.
    langs: BTreeMap<S, u32>,
    trail: usize,
    peeled: usize,
}

/// One substitution `var := word` on the path from the root.
struct TrailEntry {
    parent: usize,
    var: S,
    word: Vec<S>,
}

enum Outcome {
    Dead(UnsatReason),
    Cut,
    Alive(Node),
}

struct Search<'b> {
    store: Store,
    trail: Vec<TrailEntry>,
    budget: &'b Budget,
    next_var: S,
}

fn substitute(eqs: &mut [Eq], x: S, w: &[S]) {
    let rewrite = |side: &mut Vec<S>| {
        if side.contains(&x) {
            let mut out = Vec::with_capacity(side.len() + w.len());
            for &s in side.iter() {
                if s == x {
                    out.extend_from_slice(w);
                } else {
                    out.push(s);
                }
            }
            *side = out;
        }
    };
    for (l, r) in eqs.iter_mut() {
        rewrite(l);
        rewrite(r);
    }
}

fn occurs(eqs: &[Eq], x: S) -> bool {
    eqs.iter().any(|(l, r)| l.contains(&x) || r.contains(&x))
}

impl Node {
    fn subst(&mut self, x: S, w: &[S]) {
        substitute(&mut self.eqs, x, w);
        substitute(&mut self.neqs, x, w);
    }

    fn occurs(&self, x: S) -> bool {
        occurs(&self.eqs, x) || occurs(&self.neqs, x)
    }
}

impl Search<'_> {
    fn lang(&self, n: &Node, x: S) -> u32 {
        n.langs.get(&x).copied().unwrap_or(UNIVERSAL)
    }

    fn set_lang(&mut self, n: &mut Node, x: S, id: u32) -> bool {
        if self.store.info[id as usize].empty {
            return false;
        }
        if id == UNIVERSAL {
            n.langs.remove(&x);
        } else {
            n.langs.insert(x, id);
        }
        true
    }

    fn log(&mut self, n: &mut Node, x: S, w: Vec<S>) {
        self.trail.push(TrailEntry {
            parent: n.trail,
            var: x,
            word: w,
        });
        n.trail = self.trail.len() - 1;
    }

    /// `x := w` where the caller has already accounted for the language of `x`.
    fn assign(&mut self, n: &mut Node, x: S, w: Vec<S>) {
        n.subst(x, &w);
        n.langs.remove(&x);
        self.log(n, x, w);
    }

    fn normalize(&mut self, mut n: Node) -> Outcome {
        'outer: loop {
            let mut i = 0;
            while i < n.eqs.len() {
                let (l, r) = &mut n.eqs[i];
                let pre = l.iter().zip(r.iter()).take_while(|(a, b)| a == b).count();
                l.drain(..pre);
                r.drain(..pre);
                let suf = l
                    .iter()
                    .rev()
                    .zip(r.iter().rev())
                    .take_while(|(a, b)| a == b)
                    .count();
                l.truncate(l.len() - suf);
                r.truncate(r.len() - suf);
                if l.is_empty() && r.is_empty() {
                    n.eqs.remove(i);
                    continue;
                }
                if let (Some(&a), Some(&b)) = (l.first(), r.first()) {
                    if !is_var(a) && !is_var(b) {
                        return Outcome::Dead(UnsatReason::Exhausted);
                    }
                }
                if let (Some(&a), Some(&b)) = (l.last(), r.last()) {
                    if !is_var(a) && !is_var(b) {
                        return Outcome::Dead(UnsatReason::Exhausted);
                    }
                }
                if l.is_empty() || r.is_empty() {
                    let side = if l.is_empty() { r.clone() } else { l.clone() };
                    if side.iter().any(|&s| !is_var(s)) {
                        return Outcome::Dead(UnsatReason::Exhausted);
                    }
                    for x in side {
                        if !n.occurs(x) {
                            continue;
                        }
                        if !self.store.info[self.lang(&n, x) as usize].eps {
                            return Outcome::Dead(UnsatReason::Exhausted);
                        }
                        self.assign(&mut n, x, Vec::new());
                    }
                    continue 'outer;
                }
                i += 1;
            }
            // variables with a one-word language are constants
            let fixed: Vec<(S, Vec<Letter>)> = n
                .langs
                .iter()
                .filter_map(|(&x, &id)| {
                    let info = &self.store.info[id as usize];
                    info.single.clone().map(|w| (x, w))
                })
                .filter(|(x, _)| n.occurs(*x))
                .collect();
            if !fixed.is_empty() {
                for (x, w) in fixed {
                    self.assign(&mut n, x, w.iter().map(|&l| l as S).collect());
                }
                continue;
            }
            for (x, id) in n.langs.iter() {
                if self.store.info[*id as usize].empty {
                    let _ = x;
                    return Outcome::Dead(UnsatReason::Exhausted);
                }
            }
            // x = y, and definitions x = t of unconstrained x
            for i in 0..n.eqs.len() {
                for flip in [false, true] {
                    let (l, r) = &n.eqs[i];
                    let (one, t) = if flip { (r, l) } else { (l, r) };
                    if one.len() != 1 || !is_var(one[0]) || t.contains(&one[0]) {
                        continue;
                    }
                    let x = one[0];
                    let t = t.clone();
                    let lx = self.lang(&n, x);
                    if t.len() == 1 && is_var(t[0]) {
                        let y = t[0];
                        let ly = self.lang(&n, y);
                        let both = self.store.intersect(lx, ly);
                        if !self.set_lang(&mut n, y, both) {
                            return Outcome::Dead(UnsatReason::Exhausted);
                        }
                    } else if lx != UNIVERSAL {
                        continue;
                    }
                    n.eqs.remove(i);
                    self.assign(&mut n, x, t);
                    continue 'outer;
                }
            }
            break;
        }
        if !self.settle_disequations(&mut n) {
            return Outcome::Dead(UnsatReason::Exhausted);
        }
        // variables without occurrences take their shortest word
        let idle: Vec<(S, u32)> = n
            .langs
            .iter()
            .map(|(&x, &id)| (x, id))
            .filter(|(x, _)| !n.occurs(*x))
            .collect();
        for (x, id) in idle {
            match self.store.dfas[id as usize].shortest_word() {
                None => return Outcome::Dead(UnsatReason::Exhausted),
                Some(w) => self.assign(&mut n, x, w.iter().map(|&l| l as S).collect()),
            }
        }
        if !self.lengths_feasible(&n) {
            return Outcome::Dead(UnsatReason::LengthInfeasible);
        }
        if n.peeled > self.budget.witness_len {
            return Outcome::Cut;
        }
        Outcome::Alive(n)
    }

    fn length_range(&self, n: &Node, side: &[S]) -> (usize, Option<usize>) {
        let (mut lo, mut hi) = (0usize, Some(0usize));
        for &s in side {
            if is_var(s) {
                let info = &self.store.info[self.lang(n, s) as usize];
                lo += info.min;
                hi = hi.zip(info.max).map(|(a, b)| a + b);
            } else {
                lo += 1;
                hi = hi.map(|a| a + 1);
            }
        }
        (lo, hi)
    }

    /// Drops disequations that can no longer fail; `false` if one is
    /// already violated.
    fn settle_disequations(&mut self, n: &mut Node) -> bool {
        let mut neqs = core::mem::take(&mut n.neqs);
        let mut keep = Vec::with_capacity(neqs.len());
        for (mut l, mut r) in neqs.drain(..) {
            let pre = l.iter().zip(r.iter()).take_while(|(a, b)| a == b).count();
            l.drain(..pre);
            r.drain(..pre);
            let suf = l
                .iter()
                .rev()
                .zip(r.iter().rev())
                .take_while(|(a, b)| a == b)
                .count();
            l.truncate(l.len() - suf);
            r.truncate(r.len() - suf);
            if l.is_empty() && r.is_empty() {
                return false;
            }
            let letters = |a: Option<&S>, b: Option<&S>| {
                matches!((a, b), (Some(&a), Some(&b)) if !is_var(a) && !is_var(b))
            };
            if letters(l.first(), r.first()) || letters(l.last(), r.last()) {
                continue;
            }
            let (llo, lhi) = self.length_range(n, &l);
            let (rlo, rhi) = self.length_range(n, &r);
            if lhi.is_some_and(|h| h < rlo) || rhi.is_some_and(|h| h < llo) {
                continue;
            }
            keep.push((l, r));
        }
        keep.sort();
        keep.dedup();
        n.neqs = keep;
        true
    }

    fn fresh(&mut self) -> S {
        self.next_var += 1;
        self.next_var - 1
    }

    /// Replaces disequation `i` by the ways two words can differ.
    fn split_disequation(&mut self, n: &Node, i: usize) -> Vec<Node> {
        let (u, v) = n.neqs[i].clone();
        let mut base = n.clone();
        base.neqs.remove(i);
        let mut out = Vec::new();
        for (x, y) in [(&u, &v), (&v, &u)] {
            if y.is_empty() {
                let mut zs: Vec<S> = x.clone();
                zs.sort();
                zs.dedup();
                for z in zs {
                    let mut c = base.clone();
                    let l = self.store.intersect(self.lang(n, z), SIGMA_PLUS);
                    if self.set_lang(&mut c, z, l) {
                        out.push(c);
                    }
                }
                return out;
            }
            if x.len() == 1 && is_var(x[0]) && y.iter().all(|&s| !is_var(s)) {
                let w: Vec<Letter> = y.iter().map(|&s| s as Letter).collect();
                let other = self.store.intern(Dfa::word(&w).complement());
                let l = self.store.intersect(self.lang(n, x[0]), other);
                let mut c = base.clone();
                if self.set_lang(&mut c, x[0], l) {
                    out.push(c);
                }
                return out;
            }
        }
        for alpha in LETTERS {
            let (p, s1, s2) = (self.fresh(), self.fresh(), self.fresh());
            let not_alpha = self.store.not_starting_with(alpha);
            let mut c = base.clone();
            c.eqs.push((u.clone(), vec![p, alpha as S, s1]));
            c.eqs.push((v.clone(), vec![p, s2]));
            c.langs.insert(s2, not_alpha);
            out.push(c);
        }
        for (x, y) in [(&u, &v), (&v, &u)] {
            let s = self.fresh();
            let mut longer = y.clone();
            longer.push(s);
            let mut c = base.clone();
            c.eqs.push((x.clone(), longer));
            c.langs.insert(s, SIGMA_PLUS);
            out.push(c);
        }
        out
    }

    /// Bounds propagation and a divisibility test on the length equations.
    fn lengths_feasible(&self, n: &Node) -> bool {
        const INF: i128 = i128::MAX / 8;
        let mut vars: BTreeMap<S, (i128, i128)> = BTreeMap::new();
        let mut rows: Vec<(BTreeMap<S, i128>, i128)> = Vec::new();
        for (l, r) in &n.eqs {
            let mut coef: BTreeMap<S, i128> = BTreeMap::new();
            let mut k: i128 = 0;
            for &s in l {
                if is_var(s) {
                    *coef.entry(s).or_default() += 1;
                } else {
                    k -= 1;
                }
            }
            for &s in r {
                if is_var(s) {
                    *coef.entry(s).or_default() -= 1;
                } else {
                    k += 1;
                }
            }
            coef.retain(|_, c| *c != 0);
            for &x in coef.keys() {
                vars.entry(x).or_insert_with(|| {
                    let info = &self.store.info[self.lang(n, x) as usize];
                    (info.min as i128, info.max.map_or(INF, |m| m as i128))
                });
            }
            if coef.is_empty() {
                if k != 0 {
                    return false;
                }
                continue;
            }
            rows.push((coef, k));
        }
        for _ in 0..16 {
            let mut changed = false;
            for (coef, k) in &rows {
                for (&x, &c) in coef {
                    let (mut rmin, mut rmax) = (0i128, 0i128);
                    for (&y, &d) in coef {
                        if y == x {
                            continue;
                        }
                        let (lo, hi) = vars[&y];
                        let (a, b) = if d > 0 {
                            (d * lo, if hi >= INF { INF } else { d * hi })
                        } else {
                            (if hi >= INF { -INF } else { d * hi }, d * lo)
                        };
                        rmin = if a <= -INF || rmin <= -INF { -INF } else { rmin + a };
                        rmax = if b >= INF || rmax >= INF { INF } else { rmax + b };
                    }
                    // c * |x| = k - rest
                    let (tlo, thi) = (
                        if rmax >= INF { -INF } else { k - rmax },
                        if rmin <= -INF { INF } else { k - rmin },
                    );
                    let (mut lo, mut hi) = if c > 0 {
                        (
                            if tlo <= -INF { -INF } else { div_ceil(tlo, c) },
                            if thi >= INF { INF } else { div_floor(thi, c) },
                        )
                    } else {
                        (
                            if thi >= INF { -INF } else { div_ceil(thi, c) },
                            if tlo <= -INF { INF } else { div_floor(tlo, c) },
                        )
                    };
                    let cur = vars[&x];
                    lo = lo.max(cur.0);
                    hi = hi.min(cur.1);
                    if lo > hi {
                        return false;
                    }
                    if (lo, hi) != cur {
                        vars.insert(x, (lo, hi));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (coef, k) in &rows {
            let mut rest = *k;
            let mut g: i128 = 0;
            for (&x, &c) in coef {
                let (lo, hi) = vars[&x];
                if lo == hi {
                    rest -= c * lo;
                } else {
                    g = gcd(g, c.abs());
                }
            }
            if g == 0 {
                if rest != 0 {
                    return false;
                }
            } else if rest % g != 0 {
                return false;
            }
        }
        true
    }

    fn witness(&self, n: &Node) -> BTreeMap<S, Vec<Letter>> {
        let mut env: BTreeMap<S, Vec<Letter>> = BTreeMap::new();
        for (&x, &id) in &n.langs {
            env.insert(x, self.store.dfas[id as usize].shortest_word().unwrap_or_default());
        }
        let mut t = n.trail;
        while t != 0 {
            let e = &self.trail[t];
            let mut w = Vec::new();
            for &s in &e.word {
                if is_var(s) {
                    w.extend(env.get(&s).cloned().unwrap_or_default());
                } else {
                    w.push(s as Letter);
                }
            }
            env.insert(e.var, w);
            t = e.parent;
        }
        env
    }

    /// Children for a definition `x = t`, splitting the language of `x`
    /// along the symbols of `t`.
    fn split_definition(&mut self, n: &Node, eq: usize, x: S, t: &[S]) -> Vec<Node> {
        let lx = self.lang(n, x);
        let mut out = Vec::new();
        let mut base = n.clone();
        base.eqs.remove(eq);
        base.langs.remove(&x);
        let mut langs = base.langs.clone();
        self.split_walk(lx, t, 0, 0, &mut langs, &mut |search, langs| {
            let mut child = base.clone();
            child.langs = langs.clone();
            search.assign(&mut child, x, t.to_vec());
            out.push(child);
        });
        out
    }

    fn split_walk(
        &mut self,
        d: u32,
        t: &[S],
        i: usize,
        q: u32,
        langs: &mut BTreeMap<S, u32>,
        emit: &mut dyn FnMut(&mut Self, &BTreeMap<S, u32>),
    ) {
        if i == t.len() {
            if self.store.dfas[d as usize].is_accepting(q as usize) {
                emit(self, langs);
            }
            return;
        }
        let s = t[i];
        if !is_var(s) {
            let next = self.store.dfas[d as usize].step(q as usize, s as Letter) as u32;
            if self.store.info[d as usize].live[next as usize] {
                self.split_walk(d, t, i + 1, next, langs, emit);
            }
            return;
        }
        let states = self.store.dfas[d as usize].states() as u32;
        for q2 in 0..states {
            if !self.store.info[d as usize].live[q2 as usize] {
                continue;
            }
            let slice = self.store.slice(d, q, q2);
            let old = langs.get(&s).copied().unwrap_or(UNIVERSAL);
            let new = self.store.intersect(old, slice);
            if self.store.info[new as usize].empty {
                continue;
            }
            if new == UNIVERSAL {
                langs.remove(&s);
            } else {
                langs.insert(s, new);
            }
            self.split_walk(d, t, i + 1, q2, langs, emit);
            if old == UNIVERSAL {
                langs.remove(&s);
            } else {
                langs.insert(s, old);
            }
        }
    }

    fn definition_cost(&self, n: &Node, x: S, t: &[S]) -> u64 {
        let states = self.store.dfas[self.lang(n, x) as usize].states() as u64;
        let vars = t.iter().filter(|&&s| is_var(s)).count() as u32;
        states.saturating_pow(vars)
    }

    fn branch(&mut self, n: &Node) -> Vec<Node> {
        // cheapest definition x = t with x not in t
        let mut best: Option<(u64, usize, S, Vec<S>)> = None;
        for (i, (l, r)) in n.eqs.iter().enumerate() {
            for (one, t) in [(l, r), (r, l)] {
                if one.len() == 1 && is_var(one[0]) && !t.contains(&one[0]) {
                    let cost = self.definition_cost(n, one[0], t);
                    if cost <= 256 && best.as_ref().map_or(true, |b| cost < b.0) {
                        best = Some((cost, i, one[0], t.clone()));
                    }
                }
            }
        }
        if let Some((_, i, x, t)) = best {
            return self.split_definition(n, i, x, &t);
        }
        let mut pick = (usize::MAX, 0);
        for (i, (l, r)) in n.eqs.iter().enumerate() {
            let w = self.fanout(n, l[0], r[0]);
            if w < pick.0 {
                pick = (w, i);
            }
        }
        let (l, r) = &n.eqs[pick.1];
        let (a, b) = (l[0], r[0]);
        let mut children = Vec::new();
        match (is_var(a), is_var(b)) {
            (true, false) | (false, true) => {
                let (x, alpha) = if is_var(a) { (a, b) } else { (b, a) };
                self.var_letter(n, x, alpha as Letter, &mut children);
            }
            _ => self.var_var(n, a, b, &mut children),
        }
        if self.budget.reverse_branches {
            children.reverse();
        }
        children
    }

    /// Estimated number of children for the leading pair `a`, `b`.
    fn fanout(&mut self, n: &Node, a: S, b: S) -> usize {
        let eps = |s: &mut Self, x: S| s.store.info[s.lang(n, x) as usize].eps as usize;
        match (is_var(a), is_var(b)) {
            (true, false) | (false, true) => {
                let (x, alpha) = if is_var(a) { (a, b) } else { (b, a) };
                let d = self.store.derivative(self.lang(n, x), alpha as Letter);
                eps(self, x) + !self.store.info[d as usize].empty as usize
            }
            _ => {
                let states = self.store.dfas[self.lang(n, a) as usize].states()
                    + self.store.dfas[self.lang(n, b) as usize].states();
                eps(self, a) + eps(self, b) + 1 + states
            }
        }
    }

    fn var_letter(&mut self, n: &Node, x: S, alpha: Letter, out: &mut Vec<Node>) {
        let lx = self.lang(n, x);
        if self.store.info[lx as usize].eps {
            let mut c = n.clone();
            self.assign(&mut c, x, Vec::new());
            out.push(c);
        }
        let d = self.store.derivative(lx, alpha);
        let mut c = n.clone();
        if self.set_lang(&mut c, x, d) {
            c.subst(x, &[alpha as S, x]);
            self.log(&mut c, x, vec![alpha as S, x]);
            c.peeled += 1;
            out.push(c);
        }
    }

    fn var_var(&mut self, n: &Node, x: S, y: S, out: &mut Vec<Node>) {
        let (lx, ly) = (self.lang(n, x), self.lang(n, y));
        for z in [x, y] {
            if self.store.info[self.lang(n, z) as usize].eps {
                let mut c = n.clone();
                self.assign(&mut c, z, Vec::new());
                out.push(c);
            }
        }
        let px = self.store.intersect(lx, SIGMA_PLUS);
        let py = self.store.intersect(ly, SIGMA_PLUS);
        // x = y
        let both = self.store.intersect(px, py);
        let mut c = n.clone();
        if self.set_lang(&mut c, y, both) {
            c.langs.remove(&x);
            c.subst(x, &[y]);
            self.log(&mut c, x, vec![y]);
            out.push(c);
        }
        // x = y x' and y = x y' with all parts nonempty
        for (long, short, pl, ps) in [(x, y, px, py), (y, x, py, px)] {
            let states = self.store.dfas[pl as usize].states() as u32;
            for q in 0..states {
                if !self.store.info[pl as usize].live[q as usize] {
                    continue;
                }
                let head = self.store.slice(pl, 0, q);
                let head = self.store.intersect(ps, head);
                let tail = self.store.suffix(pl, q);
                let tail = self.store.intersect(tail, SIGMA_PLUS);
                if self.store.info[head as usize].empty || self.store.info[tail as usize].empty {
                    continue;
                }
                let mut c = n.clone();
                self.set_lang(&mut c, short, head);
                self.set_lang(&mut c, long, tail);
                c.subst(long, &[short, long]);
                self.log(&mut c, long, vec![short, long]);
                out.push(c);
            }
        }
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

type Key = (Vec<Eq>, Vec<Eq>, Vec<u32>);

/// Memo key: the node with variables renamed by first occurrence.
fn canonical(n: &Node) -> Key {
    let mut names: BTreeMap<S, S> = BTreeMap::new();
    let mut order = Vec::new();
    let mut rename = |s: S| -> S {
        if !is_var(s) {
            return s;
        }
        let next = VAR0 + names.len() as u32;
        *names.entry(s).or_insert_with(|| {
            order.push(s);
            next
        })
    };
    let mut side = |eqs: &[Eq]| -> Vec<Eq> {
        eqs.iter()
            .map(|(l, r)| {
                (
                    l.iter().map(|&s| rename(s)).collect(),
                    r.iter().map(|&s| rename(s)).collect(),
                )
            })
            .collect()
    };
    let eqs = side(&n.eqs);
    let neqs = side(&n.neqs);
    let langs = order
        .iter()
        .map(|x| n.langs.get(x).copied().unwrap_or(UNIVERSAL))
        .collect();
    (eqs, neqs, langs)
}

/// 128-bit hash of the canonical form. Only this is remembered per state.
fn fingerprint(n: &Node) -> u128 {
    let mut h = SipHasher13::new();
    canonical(n).hash(&mut h);
    h.finish128().as_u128()
}

/// Symbols held by pending states before the search gives up.
const QUEUE_SYMBOLS: usize = 1 << 23;

fn symbols(n: &Node) -> usize {
    n.eqs.iter().chain(&n.neqs).map(|(l, r)| l.len() + r.len()).sum::<usize>() + 1
}

/// Counters for one search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: usize,
    pub largest: usize,
}

/// Decides a conjunction of equations, disequations and memberships.
pub fn solve_clause(clause: &Clause, budget: &Budget) -> SolverResult {
    solve_clause_stats(clause, budget, &mut SearchStats::default())
}

pub fn solve_clause_stats(
    clause: &Clause,
    budget: &Budget,
    stats: &mut SearchStats,
) -> SolverResult {
    solve_plain(clause, budget, stats)
}

/// Cheap check that the conjunction of `lits` has no
/// solution; `false` means not refuted within the probe budget.
pub(crate) fn refutes(lits: &[Literal], budget: &Budget, stats: &mut SearchStats) -> bool {
    let clause = Clause {
        literals: lits.to_vec(),
    };
    let probe = Budget {
        nodes: budget.nodes.min(PROBE_NODES),
        ..budget.clone()
    };
    matches!(solve_plain(&clause, &probe, stats), SolverResult::Unsat(_))
}

const PROBE_NODES: usize = 1000;

fn solve_plain(clause: &Clause, budget: &Budget, stats: &mut SearchStats) -> SolverResult {
    let names: Vec<String> = clause.vars().into_iter().collect();
    let id = |x: &String| VAR0 + names.binary_search(x).unwrap() as u32;
    let word = |w: &[Sym]| -> Vec<S> {
        w.iter()
            .map(|s| match s {
                Sym::Letter(l) => *l as S,
                Sym::Var(x) => id(x),
            })
            .collect()
    };
    let mut search = Search {
        store: Store::new(),
        trail: vec![TrailEntry {
            parent: 0,
            var: 0,
            word: Vec::new(),
        }],
        budget,
        next_var: VAR0 + names.len() as u32,
    };
    let mut root = Node {
        eqs: Vec::new(),
        neqs: Vec::new(),
        langs: BTreeMap::new(),
        trail: 0,
        peeled: 0,
    };
    for l in &clause.literals {
        match l {
            Literal::Eq(a, b) => root.eqs.push((word(a), word(b))),
            Literal::In(x, d) => {
                let d = search.store.intern(d.clone());
                let cur = search.lang(&root, id(x));
                let both = search.store.intersect(cur, d);
                if !search.set_lang(&mut root, id(x), both) {
                    return SolverResult::Unsat(UnsatReason::Exhausted);
                }
            }
            Literal::Ne(a, b) => root.neqs.push((word(a), word(b))),
        }
    }
    // every variable gets a trail entry or a language so that it is assigned
    for x in 0..names.len() as u32 {
        if !root.occurs(VAR0 + x) && !root.langs.contains_key(&(VAR0 + x)) {
            root.langs.insert(VAR0 + x, UNIVERSAL);
        }
    }
    let root = match search.normalize(root) {
        Outcome::Dead(r) => return SolverResult::Unsat(r),
        Outcome::Cut => {
            return SolverResult::Unknown(BudgetReport {
                nodes: 0,
                max_len: budget.witness_len,
                cause: UnknownCause::LengthCap,
            })
        }
        Outcome::Alive(n) => n,
    };
    let mut seen: BTreeSet<u128> = BTreeSet::new();
    seen.insert(fingerprint(&root));
    let mut held = symbols(&root);
    let mut queue = VecDeque::from([root]);
    let mut cut = false;
    let mut expanded = 0usize;
    while let Some(n) = queue.pop_front() {
        held -= symbols(&n);
        if n.eqs.is_empty() {
            let env = search.witness(&n);
            let value = |side: &[S]| -> Vec<Letter> {
                let mut out = Vec::new();
                for &s in side {
                    if is_var(s) {
                        out.extend(env.get(&s).cloned().unwrap_or_default());
                    } else {
                        out.push(s as Letter);
                    }
                }
                out
            };
            if let Some(i) = n.neqs.iter().position(|(l, r)| value(l) == value(r)) {
                expanded += 1;
                stats.nodes += 1;
                for child in search.split_disequation(&n, i) {
                    match search.normalize(child) {
                        Outcome::Dead(_) => {}
                        Outcome::Cut => cut = true,
                        Outcome::Alive(c) => {
                            if seen.insert(fingerprint(&c)) {
                                held += symbols(&c);
                                queue.push_back(c);
                            }
                        }
                    }
                }
                continue;
            }
            let words: BTreeMap<String, Vec<Letter>> = names
                .iter()
                .enumerate()
                .map(|(i, x)| (x.clone(), env.get(&(VAR0 + i as u32)).cloned().unwrap_or_default()))
                .collect();
            if clause.holds(&words) != Some(true) {
                return SolverResult::Unknown(BudgetReport {
                    nodes: expanded,
                    max_len: budget.witness_len,
                    cause: UnknownCause::WitnessRejected,
                });
            }
            let decoded = words
                .iter()
                .filter_map(|(x, w)| decode_word(w).ok().map(|v| (x.clone(), v)))
                .collect();
            return SolverResult::Sat(Witness { words, decoded });
        }
        expanded += 1;
        stats.nodes += 1;
        if expanded > budget.nodes || held > QUEUE_SYMBOLS {
            return SolverResult::Unknown(BudgetReport {
                nodes: expanded,
                max_len: budget.witness_len,
                cause: UnknownCause::NodeBudget,
            });
        }
        let size: usize = n.eqs.iter().map(|(l, r)| l.len() + r.len()).sum();
        stats.largest = stats.largest.max(size);
        for child in search.branch(&n) {
            match search.normalize(child) {
                Outcome::Dead(_) => {}
                Outcome::Cut => cut = true,
                Outcome::Alive(c) => {
                    if seen.insert(fingerprint(&c)) {
                        held += symbols(&c);
                        queue.push_back(c);
                    }
                }
            }
        }
    }
    if cut {
        SolverResult::Unknown(BudgetReport {
            nodes: expanded,
            max_len: budget.witness_len,
            cause: UnknownCause::LengthCap,
        })
    } else {
        SolverResult::Unsat(UnsatReason::Exhausted)
    }
}
