//! Command-line front end for `rhor-core`: file formats, reconstruction
//! runs, convergence sweeps and synthetic data.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 validation error,
//! 4 non-convergence (outputs are still written when the run itself finished).

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod io;
pub mod manifest;

use args::{Cli, Command};
use error::{CliError, Status};

pub fn run(cli: &Cli) -> Result<Status, CliError> {
    match &cli.command {
        Command::Reconstruct(a) => commands::reconstruct::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
    }
}
