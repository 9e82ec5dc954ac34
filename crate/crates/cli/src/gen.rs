//! Seeded generator of small quantifier-free formulas, for differential
//! testing against the oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqsolve_core::syntax::{parse_formula, Formula};

/// Shape limits of generated formulas.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub vars: usize,
    pub atoms: usize,
    pub lo: i64,
    pub hi: i64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            vars: 3,
            atoms: 4,
            lo: -2,
            hi: 2,
        }
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
    shape: Shape,
}

const NAMES: [&str; 3] = ["x", "y", "z"];

impl Generator {
    pub fn new(seed: u64, shape: Shape) -> Generator {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            shape,
        }
    }

    /// Next formula, as source text.
    pub fn text(&mut self) -> String {
        let n = self.rng.gen_range(1..=self.shape.atoms);
        let atoms: Vec<String> = (0..n).map(|_| self.atom()).collect();
        self.combine(&atoms)
    }

    pub fn formula(&mut self) -> (String, Formula) {
        let text = self.text();
        let f = parse_formula(&text).expect("generated formulas parse");
        (text, f)
    }

    fn var(&mut self) -> &'static str {
        NAMES[self.rng.gen_range(0..self.shape.vars.clamp(1, NAMES.len()))]
    }

    fn constant(&mut self) -> i64 {
        self.rng.gen_range(self.shape.lo..=self.shape.hi)
    }

    fn lit(&mut self) -> String {
        let k = self.constant();
        if k < 0 {
            format!("({k})")
        } else {
            k.to_string()
        }
    }

    fn index(&mut self) -> i64 {
        self.rng.gen_range(-2..=2)
    }

    fn seq_item(&mut self) -> String {
        match self.rng.gen_range(0..7) {
            0..=2 => self.var().to_string(),
            3 => self.lit(),
            4 => {
                let (x, k1, k2) = (self.var(), self.index(), self.index());
                format!("{x}[{k1}:{k2}]")
            }
            5 => format!("first({})", self.var()),
            _ => format!("last({})", self.var()),
        }
    }

    fn seq_term(&mut self) -> String {
        if self.rng.gen_ratio(1, 10) {
            return "eps".into();
        }
        let n = self.rng.gen_range(1..=3);
        let items: Vec<String> = (0..n).map(|_| self.seq_item()).collect();
        items.join(" ++ ")
    }

    fn int_term(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 | 1 => self.var().to_string(),
            2 => self.lit(),
            3 => format!("{} + {}", self.var(), self.lit()),
            4 => format!("{} - {}", self.var(), self.var()),
            _ => format!("last({})", self.var()),
        }
    }

    fn regex(&mut self) -> String {
        let n = self.rng.gen_range(1..=3);
        let mut items = Vec::new();
        for _ in 0..n {
            let item = match self.rng.gen_range(0..5) {
                0 | 1 => self.lit(),
                2 => "INT".into(),
                3 => "INT*".into(),
                _ => format!("({} | {})*", self.lit(), self.lit()),
            };
            items.push(item);
        }
        format!("({})", items.join(" "))
    }

    fn atom(&mut self) -> String {
        match self.rng.gen_range(0..8) {
            0..=2 => format!("{} = {}", self.seq_term(), self.seq_term()),
            3..=5 => {
                let rel = *["==", "!=", "<", "<=", ">", ">="].choose(&mut self.rng).unwrap();
                format!("{} {rel} {}", self.int_term(), self.int_term())
            }
            6 => {
                let rel = *["=", "!=", "<", "<=", ">", ">="].choose(&mut self.rng).unwrap();
                format!("len({}) {rel} {}", self.var(), self.rng.gen_range(0..=2))
            }
            _ => format!("{} in {}", self.var(), self.regex()),
        }
    }

    fn combine(&mut self, atoms: &[String]) -> String {
        let wrap = |s: &str| format!("({s})");
        let negate = self.rng.gen_ratio(1, 5);
        let body = if atoms.len() == 1 {
            atoms[0].clone()
        } else {
            let cut = self.rng.gen_range(1..atoms.len());
            let l = self.combine(&atoms[..cut]);
            let r = self.combine(&atoms[cut..]);
            let op = *["&", "&", "|", "=>", "<=>"].choose(&mut self.rng).unwrap();
            format!("{} {op} {}", wrap(&l), wrap(&r))
        };
        if negate {
            format!("!{}", wrap(&body))
        } else {
            body
        }
    }
}

impl Iterator for Generator {
    type Item = (String, Formula);

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.formula())
    }
}
