//! `epiplan`: plan existence, validation and the bundled demos from the command line.
//!
//! Exit codes: 0 solvable / valid / true, 1 unsolvable / invalid / false, 2 unknown,
//! 3 malformed input.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::RunReport;
#[cfg(test)]
use report::SCHEMA_VERSION;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (report schema 1)");

#[derive(Parser, Debug)]
#[command(name = "epiplan", version = VERSION, about = "Epistemic planning with commutativity axioms")]
struct Cli {
    /// Print a machine-readable report instead of the table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct LogicArgs {
    /// S5, C-S5, Cb-S5 or wCl-S5.
    #[arg(long)]
    logic: Option<String>,
    #[arg(long)]
    b: Option<u32>,
    #[arg(long)]
    l: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide plan existence for a task file.
    Plan {
        task: PathBuf,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long)]
        max_states: Option<usize>,
        /// Include every kept state in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Check a comma-separated plan against a task.
    Validate {
        task: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        plan: Vec<String>,
        /// Show the state after every step.
        #[arg(long)]
        explain: bool,
    },
    /// Evaluate a formula on the task's initial state.
    Eval {
        task: PathBuf,
        #[arg(long)]
        formula: String,
        /// Evaluate at one world instead of all designated worlds.
        #[arg(long)]
        world: Option<String>,
    },
    /// Print the bisimulation contraction of the task's initial state.
    Contract { task: PathBuf },
    /// Check the initial state and every action against the task's logic.
    CheckFrame {
        task: PathBuf,
        #[command(flatten)]
        logic: LogicArgs,
    },
    /// Search random states of a logic for counterexamples to the commutativity theorems.
    Probe {
        #[command(flatten)]
        logic: LogicArgs,
        #[arg(long, default_value_t = 3)]
        agents: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Bundled examples.
    #[command(subcommand)]
    Demo(Demo),
    /// Turn a two-counter machine into a task file.
    EncodeMachine {
        machine: PathBuf,
        /// Where to write the task; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = epiplan_core::encodings::MACHINE_MAX_DEPTH)]
        max_depth: usize,
    },
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// The two generals; without `--logic`, a verdict table across logics.
    CoordinatedAttack {
        #[command(flatten)]
        logic: LogicArgs,
        #[arg(long, default_value_t = 6)]
        max_depth: usize,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(3);
        }
    };
    let start = std::time::Instant::now();
    match commands::run(&cli) {
        Ok(outcome) => {
            if cli.json {
                let report = RunReport::new(&argv[1..], &outcome);
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("reports serialize")
                );
            } else {
                print!("{}", outcome.human);
                eprintln!("time      {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', "; "));
            ExitCode::from(3)
        }
    }
}
