//! `itlp` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | optimal solution, verification passed, or command succeeded |
//! | 1 | error (unreadable file, invalid instance, enumeration cap, ...) |
//! | 2 | usage error (bad or contradictory flags) |
//! | 3 | feasible solution without optimality proof |
//! | 4 | infeasible |
//! | 5 | limit reached before any solution was found |
//! | 6 | verification found violations |

mod bench;
mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "itlp", version, about = "Incomplete intermodal terminal location solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Check a solution file against its instance.
    Verify(VerifyArgs),
    /// Solve a sweep of generated instances and print a result table.
    Bench(BenchArgs),
    /// Print model sizes.
    Info(InfoArgs),
    /// Write the model in CPLEX LP format.
    ExportLp(ExportArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e4)]
    coord_max: f64,
    #[arg(long, default_value_t = 500.0)]
    demand_max: f64,
    #[arg(long, default_value_t = 5e5)]
    fixed_max: f64,
    #[arg(long, default_value_t = 1e4)]
    capacity_max: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Base,
    MinLinks,
    Handling,
    Pl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LinkModeArg {
    Exact,
    Atmost,
}

#[derive(Args, Clone)]
struct VariantArgs {
    #[arg(long, value_enum, default_value = "base")]
    variant: VariantArg,
    /// Number of links.
    #[arg(long)]
    l: Option<usize>,
    /// Number of terminals.
    #[arg(long)]
    q: Option<usize>,
    /// Seed of the handling-cost matrix (handling variant).
    #[arg(long)]
    t_seed: Option<u64>,
    /// Upper end of the handling-cost interval.
    #[arg(long, default_value_t = itlp::generator::HANDLING_MAX)]
    t_max: f64,
    #[arg(long, value_enum, default_value = "exact")]
    link_mode: LinkModeArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Exact,
    Heuristic,
    Oracle,
}

#[derive(Args, Clone)]
struct EngineArgs {
    #[arg(long, value_enum, default_value = "exact")]
    engine: Engine,
    /// Time limit of the exact engine, seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    /// Node limit of the exact engine.
    #[arg(long)]
    node_limit: Option<usize>,
    /// Relative gap at which the exact engine stops.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    /// Time budget of the heuristic engine, seconds.
    #[arg(long, default_value_t = 5.0)]
    budget: f64,
    /// Seed of the heuristic engine.
    #[arg(long, default_value_t = 0)]
    heuristic_seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    variant: VariantArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Solution file to write.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Label used in the table and the solution file.
    #[arg(long)]
    name: Option<String>,
    /// Iteration-trace CSV of the heuristic engine.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<usize>,
    /// Link counts to sweep.
    #[arg(long = "l", value_delimiter = ',')]
    l_values: Vec<usize>,
    /// Terminal counts to sweep.
    #[arg(long = "q", value_delimiter = ',')]
    q_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    #[arg(long, value_enum, default_value = "base")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "exact")]
    link_mode: LinkModeArg,
    #[arg(long)]
    t_seed: Option<u64>,
    #[arg(long, default_value_t = itlp::generator::HANDLING_MAX)]
    t_max: f64,
    #[command(flatten)]
    engine: EngineArgs,
    /// CSV with one row per cell.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Reduced,
    Literal,
}

#[derive(Args)]
struct InfoArgs {
    instance: PathBuf,
    #[command(flatten)]
    variant: VariantArgs,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[command(flatten)]
    variant: VariantArgs,
    #[arg(long, value_enum, default_value = "reduced")]
    scheme: SchemeArg,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Flags that do not fit together; reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) const EXIT_OK: u8 = 0;
pub(crate) const EXIT_ERROR: u8 = 1;
pub(crate) const EXIT_USAGE: u8 = 2;
pub(crate) const EXIT_FEASIBLE: u8 = 3;
pub(crate) const EXIT_INFEASIBLE: u8 = 4;
pub(crate) const EXIT_LIMIT: u8 = 5;
pub(crate) const EXIT_VERIFY_FAILED: u8 = 6;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => bench::run(a),
        Command::Info(a) => commands::info(a),
        Command::ExportLp(a) => commands::export_lp(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_ERROR)
            }
        }
    }
}
