//! The `recgame` command line: argument parsing, the analysis commands and
//! the acceptance criteria.

pub mod acceptance;
pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod signal_checks;

use config::{Cli, Command};
use error::CliError;
use report::Report;

/// Runs the parsed command and returns its report.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Values(a) => commands::values(a),
        Command::Discounted(a) => commands::discounted(a),
        Command::Net(a) => commands::net(a),
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Simulate(a) => commands::simulate(a, cli.seed),
        Command::Verify(a) => commands::verify(a, cli.seed),
        Command::Signals(a) => commands::signals(a, cli.seed),
        Command::Report(a) => commands::report(a, cli.seed),
    }
}
