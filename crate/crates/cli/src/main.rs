//! `teegrade`: generate synthetic exams, train and evaluate graders, and
//! analyse rater agreement.

mod commands;
mod run;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "teegrade", version, about = "Automated TEE image-quality grading on synthetic exams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic exam dataset (PGM frames plus a JSON-lines manifest).
    Gen(commands::gen::Args),
    /// Train a dual-head network on a dataset's training participants.
    Train(commands::train::Args),
    /// Evaluate a checkpoint on the held-out participants.
    Eval(commands::eval::Args),
    /// Inter-rater agreement of a dataset's manual scores.
    Agreement(commands::agreement::Args),
    /// Check every kernel's analytic gradient against finite differences.
    Gradcheck(commands::gradcheck::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Agreement(args) => commands::agreement::run(args),
        Command::Gradcheck(args) => commands::gradcheck::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
