//! The `seqsolve` command line.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use seqsolve_core::encode::{elaborate_only, encode, EncodeError};
use seqsolve_core::oracle::{brute_force_sat, Bounds, BruteResult, OracleError};
use seqsolve_core::syntax::{parse_formula, print_formula, Formula, Matrix, Quant, SyntaxError};
use seqsolve_core::vcgen::{discharge, parse_program, vcs, Vc, VcError, VcStatus};
use seqsolve_core::wordsolver::{check_sat_stats, check_valid_stats, Budget, SolveError, Stats};

pub mod args;
pub mod gen;
pub mod report;

use args::{BudgetArgs, Cli, Command, Format, Stage};
use report::{Outcome, Status};

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Syntax(PathBuf, SyntaxError),
    Solve(SolveError),
    Encode(EncodeError),
    Program(VcError),
    Oracle(OracleError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(..) => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Syntax(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Solve(e) => e.fmt(f),
            CliError::Encode(e) => e.fmt(f),
            CliError::Program(e) => e.fmt(f),
            CliError::Oracle(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CliError {}

pub fn budget(b: &BudgetArgs) -> Budget {
    Budget {
        nodes: b.nodes as usize,
        witness_len: b.witness_len as usize,
        clause_cap: b.clause_cap as usize,
        ..Budget::default()
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_formula(path: &Path) -> Result<Formula, CliError> {
    parse_formula(&read(path)?).map_err(|e| CliError::Syntax(path.to_path_buf(), e))
}

fn emit(out: &mut dyn Write, format: Format, text: &str, json: &Value) -> std::io::Result<()> {
    match format {
        Format::Text => write!(out, "{text}"),
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(json).unwrap()),
    }
}

/// Runs one command and returns the process exit code: 0 for valid/sat,
/// 1 for invalid/unsat, 2 for unknown, 3 and above for errors.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let budget = budget(&cli.budget);
    let io = |e: std::io::Error| CliError::Io(PathBuf::from("<stdout>"), e);
    match &cli.command {
        Command::Sat { file } => {
            let f = read_formula(file)?;
            let mut stats = Stats::default();
            let t = Instant::now();
            let r = check_sat_stats(&f, &budget, &mut stats).map_err(CliError::Solve)?;
            let o = Outcome::from_sat(&r, stats.nodes, t.elapsed().as_millis(), budget.witness_len);
            emit(out, cli.format, &o.to_text(), &o.to_json()).map_err(io)?;
            Ok(o.status.exit_code())
        }
        Command::Valid { file } => {
            let f = read_formula(file)?;
            let mut stats = Stats::default();
            let t = Instant::now();
            let r = check_valid_stats(&f, &budget, &mut stats).map_err(CliError::Solve)?;
            let o = Outcome::from_valid(&r, stats.nodes, t.elapsed().as_millis(), budget.witness_len);
            emit(out, cli.format, &o.to_text(), &o.to_json()).map_err(io)?;
            Ok(o.status.exit_code())
        }
        Command::Encode { file, stop_after } => {
            let f = read_formula(file)?;
            match stop_after {
                Stage::Elaborate => {
                    let text = elaborate_only(&f).map_err(CliError::Encode)?;
                    let json = json!({"schema": "wp-1", "stage": "elaborate", "formula": text});
                    emit(out, cli.format, &format!("{text}\n"), &json).map_err(io)?;
                }
                Stage::Words => {
                    let wp = encode(&f).map_err(CliError::Encode)?;
                    emit(
                        out,
                        cli.format,
                        &report::word_problem_text(&wp),
                        &report::word_problem_json(&wp),
                    )
                    .map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Oracle {
            file,
            max_len,
            lo,
            hi,
        } => {
            let f = read_formula(file)?;
            let bounds = Bounds::new(*max_len, *lo, *hi).map_err(CliError::Oracle)?;
            let t = Instant::now();
            let o = oracle(&f, &bounds)?;
            let o = Outcome {
                time_ms: t.elapsed().as_millis(),
                ..o
            };
            emit(out, cli.format, &o.to_text(), &o.to_json()).map_err(io)?;
            Ok(o.status.exit_code())
        }
        Command::Vc { file, discharge } => {
            let text = read(file)?;
            let program = parse_program(&text).map_err(|e| CliError::Syntax(file.clone(), e))?;
            let all = vcs(&program).map_err(CliError::Program)?;
            let results = if *discharge {
                Some(discharge_all(&all, &budget, cli.jobs as usize)?)
            } else {
                None
            };
            let (text, json, code) = vc_report(&all, results.as_deref());
            emit(out, cli.format, &text, &json).map_err(io)?;
            Ok(code)
        }
        Command::Gen { seed, count } => {
            let mut g = gen::Generator::new(*seed, gen::Shape::default());
            let lines: Vec<String> = (0..*count).map(|_| g.text()).collect();
            let json = json!({"seed": seed, "formulas": lines});
            let mut text = lines.join("\n");
            text.push('\n');
            emit(out, cli.format, &text, &json).map_err(io)?;
            Ok(0)
        }
    }
}

/// Bounded search: a model for existential or quantifier-free input, a
/// counterexample for universal input.
fn oracle(f: &Formula, bounds: &Bounds) -> Result<Outcome, CliError> {
    let universal = f.quant() == Some(Quant::Forall);
    let matrix = if universal {
        Matrix::not(f.matrix.clone())
    } else {
        f.matrix.clone()
    };
    let open = Formula::quantifier_free(matrix);
    let r = brute_force_sat(&open, bounds).map_err(CliError::Oracle)?;
    let (status, model, note) = match (r, universal) {
        (BruteResult::Sat(a), true) => (Status::Invalid, Some(a), None),
        (BruteResult::Sat(a), false) => (Status::Sat, Some(a), None),
        (BruteResult::NoModelWithinBounds, true) => {
            (Status::Unknown, None, Some("no counterexample within bounds".to_string()))
        }
        (BruteResult::NoModelWithinBounds, false) => {
            (Status::Unknown, None, Some("no model within bounds".to_string()))
        }
    };
    Ok(Outcome {
        status,
        model,
        note,
        nodes: 0,
        time_ms: 0,
        bound: bounds.max_len,
    })
}

/// Discharges every VC, `jobs` at a time; results keep the input order.
pub fn discharge_all(all: &[Vc], budget: &Budget, jobs: usize) -> Result<Vec<Outcome>, CliError> {
    let one = |vc: &Vc| -> Result<Outcome, CliError> {
        let mut stats = Stats::default();
        let t = Instant::now();
        let v = discharge(vc, budget, &mut stats).map_err(CliError::Solve)?;
        Ok(Outcome::from_valid(&v, stats.nodes, t.elapsed().as_millis(), budget.witness_len))
    };
    if jobs <= 1 || all.len() <= 1 {
        return all.iter().map(one).collect();
    }
    let chunk = all.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(one).collect::<Result<Vec<_>, _>>()))
            .collect();
        let mut out = Vec::new();
        for h in handles {
            out.extend(h.join().expect("worker panicked")?);
        }
        Ok(out)
    })
}

fn vc_status_name(s: &VcStatus) -> String {
    match s {
        VcStatus::Ready => "ready".into(),
        VcStatus::Weakened { dropped } => format!("weakened ({dropped} quantified hypotheses dropped)"),
        VcStatus::ByAssumption => "goal among the hypotheses".into(),
        VcStatus::Unencodable(why) => format!("unencodable: {why}"),
    }
}

fn vc_report(all: &[Vc], results: Option<&[Outcome]>) -> (String, Value, i32) {
    let mut text = String::new();
    let mut items = Vec::new();
    let mut worst: Option<Status> = None;
    for (i, vc) in all.iter().enumerate() {
        let formula = vc
            .formula
            .as_ref()
            .map(print_formula)
            .unwrap_or_else(|| vc.text.clone());
        text.push_str(&format!("[{}] {}\n  {}\n", i + 1, vc.label, vc.text));
        let mut item = json!({
            "label": vc.label.to_string(),
            "routine": vc.label.routine,
            "origin": vc.label.origin.name(),
            "lines": [vc.label.lines.first, vc.label.lines.last],
            "path": vc.label.path,
            "text": vc.text,
            "formula": formula,
            "kind": vc_status_name(&vc.status),
        });
        if let Some(rs) = results {
            let o = &rs[i];
            text.push_str(&format!("  => {}", o.to_text().replace('\n', "\n     ")));
            text = text.trim_end().to_string();
            text.push('\n');
            item["result"] = o.to_json();
            worst = Some(match worst {
                Some(w) if w.exit_code() >= o.status.exit_code() => w,
                _ => o.status,
            });
        }
        items.push(item);
    }
    match results {
        Some(_) => {
            let status = worst.unwrap_or(Status::Valid);
            text.push_str(&format!("overall: {}\n", status.name()));
            let json = json!({"schema": "res-1", "status": status.name(), "vcs": items});
            (text, json, status.exit_code())
        }
        None => (text, json!({"vcs": items}), 0),
    }
}
