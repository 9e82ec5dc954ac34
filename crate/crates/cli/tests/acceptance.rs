//! Acceptance checks, one line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqsolve::gen::{Generator, Shape};
use seqsolve_core::automata::{Letter, A, B};
use seqsolve_core::encode::{decode_word, encode, encode_as, encode_int, FrameStyle, Sym};
use seqsolve_core::oracle::{
    brute_force_sat, eval, eval_in, Assignment, Bounds, BruteResult, Seq,
};
use seqsolve_core::syntax::{parse_formula, Formula, Quant};
use seqsolve_core::vcgen::{discharge, parse_program, vcs, Vc};
use seqsolve_core::wordsolver::{
    check_sat, check_valid, solve_clause, solve_problem, Budget, Clause, Literal, SolverResult,
    Stats, Validity,
};

struct Check {
    ok: bool,
    detail: String,
}

fn pass(detail: String) -> Check {
    Check { ok: true, detail }
}

fn fail(detail: String) -> Check {
    Check { ok: false, detail }
}

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn corpus() -> Vec<(String, String, Formula)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(core_dir().join("corpus")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let expect = text
            .lines()
            .find_map(|l| l.strip_prefix("# expect: "))
            .unwrap()
            .trim()
            .to_string();
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        out.push((name, expect, parse_formula(&text).unwrap()));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Integer words written literally after `in (`.
fn pinned_words(text: &str) -> Vec<Seq> {
    let mut out = Vec::new();
    for part in text.split("in (").skip(1) {
        let inner = &part[..part.find(')').unwrap_or(part.len())];
        let nums: Option<Seq> = inner.split_whitespace().map(|t| t.parse().ok()).collect();
        if let Some(w) = nums.filter(|w| !w.is_empty()) {
            out.push(w);
        }
    }
    out
}

fn factors(words: &[Seq]) -> Vec<Seq> {
    let mut set = BTreeSet::new();
    set.insert(Vec::new());
    for w in words {
        for i in 0..w.len() {
            for j in i + 1..=w.len() {
                set.insert(w[i..j].to_vec());
            }
        }
    }
    set.into_iter().collect()
}

/// Truth of a closed corpus formula with every variable ranging over the
/// factors of the words its memberships pin down.
fn oracle_truth(f: &Formula, text: &str) -> bool {
    let domain = factors(&pinned_words(text));
    eval_in(f, &Assignment::new(), &domain).unwrap()
}

fn corpus_fidelity() -> Check {
    let t = Instant::now();
    let budget = Budget::default();
    let mut wrong = Vec::new();
    let mut covered: BTreeMap<String, (bool, bool)> = BTreeMap::new();
    for (name, expect, f) in corpus() {
        let instance = name.ends_with("_holds")
            || name.ends_with("_fails")
            || name.starts_with("sorted_1")
            || name.starts_with("sorted_2");
        if !instance {
            continue;
        }
        let text = std::fs::read_to_string(core_dir().join("corpus").join(format!("{name}.seq")))
            .unwrap();
        let truth = oracle_truth(&f, &text);
        let solver = match f.quant() {
            Some(Quant::Exists) => match check_sat(&f, &budget).unwrap() {
                SolverResult::Sat(_) => Some(true),
                SolverResult::Unsat(_) => Some(false),
                SolverResult::Unknown(_) => None,
            },
            _ => match check_valid(&f, &budget).unwrap() {
                Validity::Valid => Some(true),
                Validity::Invalid(cex) => {
                    let body = Formula::quantifier_free(f.matrix.clone());
                    if eval(&body, &cex, None) != Ok(false) {
                        wrong.push(format!("{name}: counterexample does not falsify"));
                    }
                    Some(false)
                }
                Validity::Unknown(_) => None,
            },
        };
        let expected = expect == "valid" || expect == "sat";
        if solver != Some(truth) || truth != expected {
            wrong.push(format!("{name}: solver {solver:?}, oracle {truth}, expected {expect}"));
        }
        let key = if name.starts_with("sorted") { "eq04".to_string() } else { name[..4].to_string() };
        let e = covered.entry(key).or_default();
        if expected { e.0 = true } else { e.1 = true }
    }
    let complete = covered.len() == 11 && covered.values().all(|&(a, b)| a && b);
    let took = t.elapsed();
    let detail = format!("{} properties, both polarities: {complete}, {:.1}s", covered.len(), took.as_secs_f64());
    if wrong.is_empty() && complete && took < Duration::from_secs(60) {
        pass(detail)
    } else {
        fail(format!("{detail}; {wrong:?}"))
    }
}

fn program_vcs(file: &str) -> Vec<Vc> {
    let text = std::fs::read_to_string(core_dir().join("programs").join(file)).unwrap();
    vcs(&parse_program(&text).unwrap()).unwrap()
}

fn vc_regression() -> Check {
    let targets = [
        ("reverse.sqp", "=> s[1:-1] ++ rev(Result ++ s[0:0]) = old_a"),
        ("mergesort.sqp", "=> (Result ++ r[1:1])[0:0] <= l[1:1]"),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (file, goal) in targets {
        let all = program_vcs(file);
        let Some(vc) = all.iter().find(|v| v.text.ends_with(goal)) else {
            ok = false;
            notes.push(format!("{file}: no condition ending in `{goal}`"));
            continue;
        };
        let t = Instant::now();
        let v = discharge(vc, &Budget::default(), &mut Stats::default()).unwrap();
        let took = t.elapsed();
        ok &= v == Validity::Valid && took < Duration::from_secs(120);
        notes.push(format!("{file} {}: {v:?} in {:.1}s", vc.label.origin.name(), took.as_secs_f64()));
    }
    // the same step with the sortedness frame written out
    let text = std::fs::read_to_string(core_dir().join("corpus/merge_step.seq")).unwrap();
    let t = Instant::now();
    let v = check_valid(&parse_formula(&text).unwrap(), &Budget::default()).unwrap();
    ok &= v == Validity::Valid && t.elapsed() < Duration::from_secs(120);
    notes.push(format!("merge_step.seq: {v:?} in {:.1}s", t.elapsed().as_secs_f64()));
    Check { ok, detail: notes.join("; ") }
}

fn codec() -> Check {
    let bad: Vec<i64> =
        (-1000..=1000).filter(|&k| decode_word(&encode_int(k)) != Ok(vec![k])).collect();
    if bad.is_empty() {
        pass("2001 integers round-trip".into())
    } else {
        fail(format!("{} integers fail, first {}", bad.len(), bad[0]))
    }
}

struct Differential {
    disagreements: Vec<String>,
    unknown: usize,
    total: usize,
    witnesses: usize,
    unsound_witnesses: Vec<String>,
}

fn differential() -> Differential {
    let bounds = Bounds::new(3, -2, 2).unwrap();
    let budget = Budget::default();
    let mut d = Differential {
        disagreements: Vec::new(),
        unknown: 0,
        total: 0,
        witnesses: 0,
        unsound_witnesses: Vec::new(),
    };
    for (text, f) in Generator::new(2024, Shape::default()).take(500) {
        d.total += 1;
        match check_sat(&f, &budget).unwrap() {
            SolverResult::Sat(w) => {
                d.witnesses += 1;
                if eval(&f, &w.decoded, None) != Ok(true) {
                    d.unsound_witnesses.push(text.clone());
                }
                // the raw words must satisfy the word problem as well
                let wp = encode_as(&f, Quant::Exists, FrameStyle::Compact).unwrap();
                if let SolverResult::Sat(raw) = solve_problem(&wp, &budget, &mut Stats::default()) {
                    let mut env = raw.words.clone();
                    for x in wp.matrix.vars() {
                        env.entry(x).or_default();
                    }
                    if wp.matrix.eval(&env) != Some(true) {
                        d.unsound_witnesses.push(format!("{text} (words)"));
                    }
                }
            }
            SolverResult::Unsat(_) => {
                if let BruteResult::Sat(a) = brute_force_sat(&f, &bounds).unwrap() {
                    d.disagreements.push(format!("{text}: unsat but {a:?}"));
                }
            }
            SolverResult::Unknown(_) => d.unknown += 1,
        }
    }
    d
}

fn oracle_differential(d: &Differential) -> Check {
    let rate = d.unknown as f64 / d.total as f64;
    let detail = format!(
        "{} formulas, {} disagreements, unknown rate {:.1}%",
        d.total,
        d.disagreements.len(),
        rate * 100.0
    );
    if d.total >= 500 && d.disagreements.is_empty() && rate < 0.2 {
        pass(detail)
    } else {
        fail(format!("{detail}; {:?}", d.disagreements))
    }
}

/// Largest ratio |encode(f)| / |f|^2 over the corpus.
fn blowup() -> (f64, String) {
    let mut worst = (0.0, String::new());
    for (name, _, f) in corpus() {
        let n = f.size() as f64;
        let c = encode(&f).unwrap().size() as f64 / (n * n);
        if c > worst.0 {
            worst = (c, name);
        }
    }
    worst
}

fn blowup_bound() -> Check {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/blowup.baseline");
    let (c, name) = blowup();
    let Some(baseline) = std::fs::read_to_string(&path)
        .ok()
        .and_then(|s| s.lines().find_map(|l| l.strip_prefix("C = ")?.trim().parse::<f64>().ok()))
    else {
        return fail(format!("no baseline at {}; measured C = {c:.4}", path.display()));
    };
    let detail = format!("C = {c:.4} (worst {name}), baseline {baseline:.4}");
    if c <= baseline * 1.1 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn witness_soundness(d: &Differential) -> Check {
    let detail = format!("{} witnesses re-evaluated", d.witnesses);
    if d.unsound_witnesses.is_empty() && d.witnesses > 0 {
        pass(detail)
    } else {
        fail(format!("{detail}; unsound: {:?}", d.unsound_witnesses))
    }
}

const VARS: [&str; 3] = ["X", "Y", "Z"];

/// Word equations over {a, b} in which every variable occurs at most twice.
fn quadratic_clause(rng: &mut ChaCha8Rng) -> Clause {
    let mut uses = [0usize; 3];
    let mut literals = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let mut side = || -> Vec<Sym> {
            (0..rng.gen_range(1..=4))
                .map(|_| {
                    let v = rng.gen_range(0..3);
                    if rng.gen_bool(0.6) && uses[v] < 2 {
                        uses[v] += 1;
                        Sym::Var(VARS[v].to_string())
                    } else {
                        Sym::Letter(if rng.gen_bool(0.5) { A } else { B })
                    }
                })
                .collect()
        };
        let l = side();
        let r = side();
        literals.push(Literal::Eq(l, r));
    }
    Clause { literals }
}

fn words_up_to(n: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<Letter>| {
                [A, B].map(|l| {
                    let mut w = w.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// A solution with every variable of length at most four, if any.
fn brute_words(c: &Clause, words: &[Vec<Letter>]) -> bool {
    let vars: Vec<String> = c.vars().into_iter().collect();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let env: BTreeMap<String, Vec<Letter>> =
            vars.iter().cloned().zip(idx.iter().map(|&i| words[i].clone())).collect();
        if c.holds(&env) == Some(true) {
            return true;
        }
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < words.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return false;
        }
    }
}

fn quadratic_completeness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words = words_up_to(4);
    let budget = Budget::default();
    let (mut sat, mut unsat) = (0, 0);
    let mut wrong = Vec::new();
    for i in 0..200 {
        let c = quadratic_clause(&mut rng);
        let brute = brute_words(&c, &words);
        match solve_clause(&c, &budget) {
            SolverResult::Sat(w) => {
                sat += 1;
                let mut env = w.words.clone();
                for x in c.vars() {
                    env.entry(x).or_default();
                }
                if c.holds(&env) != Some(true) {
                    wrong.push(format!("#{i}: bad witness"));
                }
            }
            SolverResult::Unsat(_) => {
                unsat += 1;
                if brute {
                    wrong.push(format!("#{i}: unsat but a short solution exists"));
                }
            }
            SolverResult::Unknown(r) => wrong.push(format!("#{i}: unknown ({:?})", r.cause)),
        }
    }
    let detail = format!("200 clauses, {sat} sat, {unsat} unsat");
    if wrong.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}; {wrong:?}"))
    }
}

fn main() {
    let d = differential();
    let checks = [
        ("corpus fidelity", corpus_fidelity()),
        ("verification conditions", vc_regression()),
        ("integer codec", codec()),
        ("oracle differential", oracle_differential(&d)),
        ("blow-up bound", blowup_bound()),
        ("witness soundness", witness_soundness(&d)),
        ("quadratic clauses", quadratic_completeness()),
    ];
    let mut failed = 0;
    for (i, (name, c)) in checks.iter().enumerate() {
        let verdict = if c.ok { "pass" } else { "FAIL" };
        println!("criterion {} {name}: {verdict} ({})", i + 1, c.detail);
        failed += usize::from(!c.ok);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
