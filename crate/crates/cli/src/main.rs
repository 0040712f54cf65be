use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use specdens_cli::args::Cli;
use specdens_cli::commands::run;
use specdens_cli::CliError;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage(e.kind().to_string());
            eprint!("{}", e.render());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.category.exit_code());
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            eprintln!("{}", err.to_json());
            ExitCode::from(err.category.exit_code())
        }
    }
}
