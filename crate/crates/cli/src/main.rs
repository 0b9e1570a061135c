//! `lemmata`: check files, run goals with named tactics, verify traces,
//! lint declarations, generate and benchmark hierarchies.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "lemmata", version, about = "Tactics with checkable proof traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by the subcommands that run searches.
#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Resolution strategy for `infer_instance` goals: backward or bidir.
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long, default_value_t = lemmata::resolver::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    /// Rewrite step budget for simp and dsimp.
    #[arg(long, default_value_t = lemmata::rewriter::DEFAULT_FUEL)]
    pub fuel: usize,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
    /// Treat simp_loop_risk findings as errors.
    #[arg(long)]
    pub strict: bool,
    /// Seed for randomized generation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a file, check acyclicity and lint, and run every goal.
    Check {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Prove a single goal with a tactic.
    Prove {
        /// Tactic name; defaults to infer_instance with --class.
        #[arg(long, required_unless_present = "class")]
        tactic: Option<String>,
        /// Class goal such as `monoid(Z)`; shorthand for --tactic infer_instance.
        #[arg(long)]
        class: Option<String>,
        /// Print only the search metrics of a class goal (json or text).
        #[arg(long)]
        stats: Option<String>,
        /// Hypothesis, repeatable (used by linarith and omega).
        #[arg(long = "hyp")]
        hyps: Vec<String>,
        /// Default sort for unannotated variables and numerals.
        #[arg(long, default_value = "int")]
        sort: String,
        /// Rule set for simp; only `default` (all simp lemmas) exists.
        #[arg(long, default_value = "default")]
        simpset: String,
        /// Write the proof trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(required_unless_present = "class")]
        goal: Option<String>,
        /// Declarations the goal may refer to.
        file: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-check a proof trace against a file's declarations.
    Verify {
        trace: PathBuf,
        file: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Report lint findings.
    Lint {
        file: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print a generated hierarchy.
    Gen {
        /// chain or diamond-ladder.
        #[arg(long)]
        shape: String,
        #[arg(long)]
        n: usize,
        /// For diamond-ladder: supply the bottom instance so the query succeeds.
        #[arg(long)]
        with_fact: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Resolution metrics over generated hierarchies.
    Bench {
        #[arg(long)]
        shape: String,
        /// `K` or an inclusive range `A..B`.
        #[arg(long)]
        n: String,
        /// Comma-separated strategies.
        #[arg(long, default_value = "backward,bidir")]
        strategy: String,
        #[arg(long, default_value_t = lemmata::resolver::DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        /// Cache results during backward search.
        #[arg(long)]
        cache: bool,
        /// csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Hierarchy statistics of a file.
    Stats {
        file: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file, search, out } => commands::check(&file, &search, &out),
        Command::Prove {
            tactic,
            class,
            stats,
            hyps,
            sort,
            simpset,
            trace,
            goal,
            file,
            search,
            out,
        } => {
            // With --class the only positional argument is the file.
            let (goal, file) = match (&class, goal, file) {
                (Some(_), Some(g), None) => (None, Some(PathBuf::from(g))),
                (_, g, f) => (g, f),
            };
            commands::prove(
            &commands::ProveArgs {
                tactic: tactic.unwrap_or_else(|| "infer_instance".into()),
                hyps,
                sort,
                simpset,
                trace,
                goal: class.or(goal).expect("clap requires a goal or --class"),
                file,
                stats,
            },
            &search,
            &out,
        )
        }
        Command::Verify { trace, file, out } => commands::verify(&trace, file.as_deref(), &out),
        Command::Lint { file, out } => commands::lint(&file, &out),
        Command::Gen {
            shape,
            n,
            with_fact,
            out,
        } => commands::gen(&shape, n, with_fact, &out),
        Command::Bench {
            shape,
            n,
            strategy,
            max_depth,
            cache,
            format,
            out,
        } => commands::bench(&shape, &n, &strategy, max_depth, cache, &format, &out),
        Command::Stats { file, out } => commands::stats(&file, &out),
    };
    ExitCode::from(code)
}
