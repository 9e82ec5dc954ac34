use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "seqsolve", version, about = "Decide formulas over integer sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(flatten)]
    pub budget: BudgetArgs,

    /// Worker threads for independent queries.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Search nodes per clause.
    #[arg(long, global = true, env = "SEQSOLVE_BUDGET_NODES", default_value_t = 200_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub nodes: u64,

    /// Letters a witness may grow to along one search path.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub witness_len: u64,

    /// Largest number of DNF clauses explored.
    #[arg(long, global = true, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    pub clause_cap: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Satisfiability of a quantifier-free or existential formula.
    Sat { file: PathBuf },
    /// Validity of a quantifier-free or universal formula.
    Valid { file: PathBuf },
    /// Print the word problem a formula compiles to.
    Encode {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Stage::Words)]
        stop_after: Stage,
    },
    /// Bounded brute-force search for a model or counterexample.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
        hi: i64,
    },
    /// Verification conditions of an annotated program.
    Vc {
        file: PathBuf,
        /// Also run the solver on every condition.
        #[arg(long)]
        discharge: bool,
    },
    /// Print random quantifier-free formulas, one per line.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    /// Stop after shorthand elimination.
    Elaborate,
    /// The full word problem.
    Words,
}
