//! `rotopt`: rotation sets, constrained maximizing measures and exact
//! periodic synthesis on sofic shifts.

mod commands;
mod input;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rotopt::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => e.exit_code() as u8,
            CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "rotopt", version, about = "Exact constrained ergodic optimization on sofic shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vertices of the rotation set of φ.
    Rotset(RotsetArgs),
    /// Maximum of ∫f over invariant measures with ∫φ = h.
    Beta(BetaArgs),
    /// Periodic orbit with rotation vector exactly h, close to a given measure.
    Approx(ApproxArgs),
    /// Build and realize a plan from explicit cycles sharing a synchronizing prefix.
    Synthesize(SynthesizeArgs),
    /// Entropy of a measure or cycle, or the maximal entropy in a fiber.
    Entropy(EntropyArgs),
    /// Random objectives over one fiber; reports how often the maximizer has zero entropy.
    Experiment(ExperimentArgs),
    /// Regression checks on the three-symbol example and other small cases.
    VerifyPaper(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct ShiftArg {
    /// Shift file (alphabet, then adjacency rows, forbidden words or a labeled graph).
    #[arg(long)]
    pub shift: PathBuf,
}

#[derive(Args, Debug)]
pub struct RotsetArgs {
    #[command(flatten)]
    pub shift: ShiftArg,
    /// Constraint potential file.
    #[arg(long)]
    pub phi: PathBuf,
    /// Also write a plot (d = 2 only).
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BetaArgs {
    #[command(flatten)]
    pub shift: ShiftArg,
    #[arg(long)]
    pub phi: PathBuf,
    /// Scalar objective potential file.
    #[arg(long)]
    pub f: PathBuf,
    /// Target rotation vector, e.g. "1/2,0".
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    /// Cross-check against the simple-cycle oracle up to this length.
    #[arg(long)]
    pub max_cycle_len: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub shift: ShiftArg,
    #[arg(long)]
    pub phi: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    /// Occupation file of the measure to approximate.
    #[arg(long)]
    pub nu: PathBuf,
    /// Closeness tolerance p/q > 0.
    #[arg(long)]
    pub eps: String,
    /// Test functions (repeatable); vector-valued files count coordinatewise.
    #[arg(long)]
    pub f: Vec<PathBuf>,
    #[arg(long, default_value_t = rotopt::synthesis::DEFAULT_T_CEILING)]
    pub t_ceiling: u64,
    /// Print x symbol by symbol when it has at most this many symbols.
    #[arg(long, default_value_t = 4096)]
    pub print_limit: usize,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub shift: ShiftArg,
    #[arg(long)]
    pub phi: PathBuf,
    /// Shared synchronizing prefix.
    #[arg(long)]
    pub u: String,
    /// Cycle words a1 .. a(d+1) (repeatable, in order).
    #[arg(long = "cycle", required = true)]
    pub cycles: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    #[arg(long)]
    pub eps: String,
    #[arg(long)]
    pub f: Vec<PathBuf>,
    #[arg(long, default_value_t = rotopt::synthesis::DEFAULT_T_CEILING)]
    pub t_ceiling: u64,
    #[arg(long, default_value_t = 4096)]
    pub print_limit: usize,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub shift: ShiftArg,
    /// Occupation file; prints its entropy.
    #[arg(long, conflicts_with = "cycle")]
    pub nu: Option<PathBuf>,
    /// Periodic orbit word; prints the entropy of its measure.
    #[arg(long)]
    pub cycle: Option<String>,
    /// With --h, maximize entropy on the fiber of φ instead of the whole shift.
    #[arg(long, requires = "h")]
    pub phi: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true, requires = "phi")]
    pub h: Option<String>,
    /// Edge graph order for the unconstrained maximization.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub shift: ShiftArg,
    #[arg(long)]
    pub phi: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Order of the random objectives.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Run only the named check (repeatable).
    #[arg(long)]
    pub only: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Rotset(a) => commands::rotset(&a),
        Command::Beta(a) => commands::beta(&a),
        Command::Approx(a) => commands::approx(&a),
        Command::Synthesize(a) => commands::synthesize(&a),
        Command::Entropy(a) => commands::entropy(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::VerifyPaper(a) => verify::run(&a),
    };
    match out {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(CliError::Failed(text)) => {
            print!("{text}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
