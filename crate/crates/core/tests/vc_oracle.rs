//! Every condition the solver proves valid must have no small
//! counterexample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqsolve_core::oracle::{brute_force_sat, eval, Assignment, Bounds, BruteResult};
use seqsolve_core::syntax::{Formula, Matrix};
use seqsolve_core::vcgen::{discharge, parse_program, vcs};
use seqsolve_core::wordsolver::{Budget, Stats, Validity};

const PROGRAMS: [(&str, &str); 2] = [
    ("reverse", include_str!("../programs/reverse.sqp")),
    ("mergesort", include_str!("../programs/mergesort.sqp")),
];

/// Assignments enumerated exhaustively, at most.
const EXHAUSTIVE: usize = 400_000;
const SAMPLES: usize = 20_000;

fn counterexample(f: &Formula) -> Option<Assignment> {
    let vars: Vec<String> = f.prefix.iter().map(|(_, x)| x.clone()).collect();
    let negated = Formula::quantifier_free(Matrix::not(f.matrix.clone()));
    // widest bounds that keep the enumeration small
    for (len, lo, hi) in [(3, -2, 2), (2, -1, 1), (1, -2, 2), (1, 0, 1)] {
        let b = Bounds::new(len, lo, hi).unwrap();
        let n = b.sequences().len();
        if n.checked_pow(vars.len() as u32).is_some_and(|t| t <= EXHAUSTIVE) {
            if let BruteResult::Sat(a) = brute_force_sat(&negated, &b).unwrap() {
                return Some(a);
            }
            if len == 3 {
                return None;
            }
            break;
        }
    }
    // random assignments from the full bounds
    let domain = Bounds::new(3, -2, 2).unwrap().sequences();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..SAMPLES {
        let env: Assignment = vars
            .iter()
            .map(|x| (x.clone(), domain[rng.gen_range(0..domain.len())].clone()))
            .collect();
        if eval(&negated, &env, None) == Ok(true) {
            return Some(env);
        }
    }
    None
}

#[test]
fn valid_conditions_survive_the_oracle() {
    let mut checked = 0;
    for (name, text) in PROGRAMS {
        let program = parse_program(text).unwrap();
        for vc in vcs(&program).unwrap() {
            let Some(f) = &vc.formula else { continue };
            let v = discharge(&vc, &Budget::default(), &mut Stats::default()).unwrap();
            if v != Validity::Valid {
                continue;
            }
            checked += 1;
            if let Some(a) = counterexample(f) {
                panic!("{name}: {} is falsified by {a:?}", vc.label);
            }
        }
    }
    assert!(checked >= 10, "only {checked} valid conditions");
}
