//! The `qre` command line tool.
//!
//! Exit codes: 0 on success, 2 for usage errors and bad input, 3 when the
//! decision set is empty or unbounded, 4 when a solver fails.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;

use std::ffi::OsString;

use clap::Parser;
use log::LevelFilter;

use args::{BenchCommand, Cli, Command};
pub use error::{CliError, Result};
use input::RunConfig;

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("QRE_LOG")
        .try_init();
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Eval(a) => commands::eval(a, &cfg, cli.json),
        Command::Levelset(a) => commands::levelset(a, &cfg, cli.json),
        Command::Solve(a) => commands::solve(a, &cfg, cli.json),
        Command::Aspirational(a) => commands::aspirational(a, &cfg, cli.json),
        Command::Bench(BenchCommand::CobbDouglas(a)) => commands::bench_cobb(a, &cfg, cli.json),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match dispatch(&cli) {
        Ok(()) | Err(CliError::Closed) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
