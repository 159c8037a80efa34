//! `cartan-forge`: command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 unreadable or
//! malformed input, 3 a precondition failed.

mod args;
mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use cartan_forge::{io, Error};
use clap::Parser;

use args::Cli;
use report::RunReport;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) | Error::Io { .. } | Error::Input(_) => 2,
        Error::Precondition(_) | Error::Singular { .. } | Error::Eval(_) | Error::Form(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let mut report = RunReport::new(std::env::args().skip(1).collect(), cli.seed);
    let outcome = commands::run(&cli.command, cli.seed, &mut report);
    let code = match &outcome {
        Err(e) => {
            eprintln!("error: {e}");
            report.pass = false;
            report.error = Some(e.to_string());
            exit_code(e)
        }
        Ok(()) if !report.preconditions_pass => 3,
        Ok(()) if !report.pass => 1,
        Ok(()) => 0,
    };
    report.wall_time_s = started.elapsed().as_secs_f64();
    let written = match &cli.report {
        Some(path) => io::export_json("run-report", &report, path),
        None => io::to_json_string(&io::envelope("run-report", &report).expect("report serializes"))
            .map(|s| print!("{s}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
