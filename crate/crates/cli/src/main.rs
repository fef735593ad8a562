//! `accentor` — train, evaluate and apply character-level word stress
//! models from the command line.
//!
//! Exit codes are stable: 0 success, 1 usage or data parse failure,
//! 2 numeric abort during training or inference, 3 gradient check failure.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{accent, eval_cmd, gradcheck, homographs, train};
use settings::ConfigFile;

#[derive(Parser, Debug)]
#[command(
    name = "accentor",
    version,
    about = "Character-level word stress placement for Russian text"
)]
struct Cli {
    /// JSON config file whose keys mirror the long flag names; explicit
    /// flags win over config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the run manifest (defaults depend on the command).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build instances from a dictionary or corpus, train a model, save it.
    Train(train::TrainArgs),
    /// Insert stress marks into text read from standard input.
    Accent(accent::AccentArgs),
    /// Evaluate a saved model and write syllable-bucket reports.
    Eval(eval_cmd::EvalArgs),
    /// Extract, threshold and score homograph pairs for one or more models.
    Homographs(homographs::HomographsArgs),
    /// Check analytic gradients against finite differences.
    Gradcheck(gradcheck::GradcheckArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let config = match ConfigFile::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };

    let result = match cli.command {
        Command::Train(args) => train::run(args, &config, cli.manifest.as_deref()),
        Command::Accent(args) => accent::run(args, &config, cli.manifest.as_deref()),
        Command::Eval(args) => eval_cmd::run(args, &config, cli.manifest.as_deref()),
        Command::Homographs(args) => homographs::run(args, &config, cli.manifest.as_deref()),
        Command::Gradcheck(args) => gradcheck::run(args, &config, cli.manifest.as_deref()),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
