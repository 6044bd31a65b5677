//! `mollab`: κ tables, solution profiles, limit scans and self-checks.
//!
//! Exit status: 0 success, 1 I/O failure, 2 usage error, 3 numeric
//! failure, 4 verification failure.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{CliError, CliResult, Context};

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context::new(&cli.global)?;
    match cli.command {
        Command::Kappa { theta, general, r } => commands::kappa(&ctx, theta, &general, r),
        Command::Table {
            thetas,
            grid,
            reference_set,
            general,
            jobs,
        } => commands::table(&ctx, &thetas, grid, reference_set, &general, jobs),
        Command::CheckTable { path } => commands::check_table(&ctx, &path),
        Command::Solve { r, c, beta, points } => commands::solve(&ctx, r, c, beta, points),
        Command::Verify { level, tamper_c1 } => commands::verify(&ctx, level, tamper_c1),
        Command::Limit { y0, r_list } => commands::limit(&ctx, y0, &r_list),
        Command::Constants => commands::constants(&ctx),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let kind = match &e {
                CliError::Usage(_) => "usage error",
                CliError::Verification(_) => "verification failed",
                CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "i/o error",
                _ => "numeric failure",
            };
            eprintln!("mollab: {kind}: {e}");
            ExitCode::from(code)
        }
    }
}
