//! Command-line front end for `psaws-core`: subcommands, file formats and
//! seeded reproducible runs.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;

use std::ffi::OsString;

use clap::Parser;

pub use error::{CliError, CliResult};

/// Parse `args` and run the subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
