mod cli;
mod commands;
mod evaluate;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::commands::CliError;

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::SimulateTransitions(args) => commands::simulate_transitions(&args),
        Command::Train(args) => commands::train(&args),
        Command::TrainLibrary(args) => commands::train_library(&args),
        Command::Decode(args) => commands::decode(&args),
        Command::Summarize(args) => commands::summarize(&args),
        Command::Keyframes(args) => commands::keyframes(&args),
        Command::ClassifyTransition(args) => commands::classify(&args),
        Command::Evaluate(args) => evaluate::evaluate(&args),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("posehsmm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
