mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmu_core::values::{DEFAULT_CAP, DEFAULT_MAX_ITERS, DEFAULT_TOL_CMP, DEFAULT_TOL_FIX};
use qmu_core::Tolerances;

use crate::error::CliError;

/// Quantitative mu-calculus evaluation, parity game solving and cross-checks.
#[derive(Debug, Parser)]
#[command(name = "qmu", version)]
pub struct Cli {
    #[command(flatten)]
    pub cfg: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunConfig {
    /// Relative change at which a fixpoint iteration counts as stable.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_FIX)]
    pub tol_fix: f64,
    /// Tolerance of value comparisons.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_CMP)]
    pub tol_cmp: f64,
    /// Divergence cap: growing values above it become inf, shrinking values below 1/cap become 0.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: f64,
    /// Iteration budget per fixpoint or unfolding.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Slack of the constructed strategies.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Maximal number of moves of a simulated play.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub horizon: usize,
    /// Seed of every randomized mode.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let t = Tolerances { tol_fix: self.tol_fix, tol_cmp: self.tol_cmp, cap: self.cap, max_iters: self.max_iters };
        t.validate()?;
        Ok(t)
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Input(format!("{what} needs an explicit --seed")))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a formula on a transition system; prints the value per state.
    Eval {
        system: PathBuf,
        /// Formula text, or @path to read it from a file.
        formula: String,
    },
    /// Solve a quantitative parity game; prints the value per position.
    Solve {
        game: PathBuf,
        /// Simulate the constructed strategies against sampled positional opponents.
        #[arg(long)]
        simulate: bool,
        /// Opponents sampled per start position and player.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        /// Cross-check against Zielonka (qualitative games) or backwards induction (acyclic games).
        #[arg(long)]
        oracle: bool,
        /// Include the stage values of the outermost unfolding.
        #[arg(long)]
        stages: bool,
    },
    /// Build the model-checking game of a system and a formula.
    Mcgame { system: PathBuf, formula: String },
    /// Encode a game as a transition system.
    Gts {
        game: PathBuf,
        /// Number of priorities; defaults to one more than the largest.
        #[arg(long)]
        d: Option<u32>,
    },
    /// Print the formula describing game values for priorities below D.
    Winfmla { d: u32 },
    /// Compare the logic side and the game side; exit code 1 on disagreement.
    Check(CheckArgs),
    /// Print the negation normal form of a formula.
    Nnf { formula: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMode {
    /// Formula value against its model-checking game.
    Mc,
    /// Game value against the win formula on the encoded system.
    Win,
    /// Negated formula against the reciprocal of the formula.
    Nnf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub mode: CheckMode,
    /// System file (mc, nnf) or game file (win); omit for a seeded random batch.
    pub input: Option<PathBuf>,
    /// Formula text or @path (mc, nnf).
    pub formula: Option<String>,
    /// Number of priorities (win).
    #[arg(long)]
    pub d: Option<u32>,
    /// Instances of a random batch.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
