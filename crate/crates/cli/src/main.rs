use std::process::ExitCode;

use clap::Parser;
use deeppoly_cli::{execute, Cli, CliError};

fn run(cli: &Cli) -> Result<(), CliError> {
    let outcome = execute(cli)?;
    for path in outcome.write(&cli.outdir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
