//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.

mod config;
mod dispatch;

use std::ffi::OsString;

pub use config::{parse_config, CliConfig, Command, ParseOutcome, DEFAULT_OUT_DIR, OUT_DIR_ENV};
pub use dispatch::{dispatch, Artifact};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses, dispatches and reports; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(argv) {
        Ok(c) => c,
        Err(ParseOutcome::Info(text)) => {
            print!("{text}");
            return EXIT_OK;
        }
        Err(ParseOutcome::Usage(msg)) => {
            eprintln!("{msg}");
            return EXIT_USAGE;
        }
    };
    match dispatch(&config) {
        Ok(artifacts) => {
            log::info!("wrote {} files to {}", artifacts.len(), config.out.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            EXIT_FAILURE
        }
    }
}
