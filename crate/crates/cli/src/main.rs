use std::process::ExitCode;

use clap::Parser;
use recgame_cli::config::Cli;
use recgame_cli::error::CliError;

fn write(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match recgame_cli::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = report.render();
    print!("{text}");
    let written = cli
        .out
        .as_deref()
        .map(|p| write(p, &text))
        .transpose()
        .and_then(|_| {
            cli.table
                .as_deref()
                .map(|p| write(p, &report.table()))
                .transpose()
        });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
