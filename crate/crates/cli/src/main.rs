mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use entgeom::Error;

use args::Cli;
use commands::Outcome;

fn usage_error(message: &str) -> ExitCode {
    eprintln!("{}", message.lines().find(|l| !l.trim().is_empty()).unwrap_or("error"));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return usage_error(&e.render().to_string()),
    };
    let outcome = commands::run(&cli).and_then(|o| match o {
        Outcome::Reports(reports) => {
            commands::write_reports(&cli.common, &reports)?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Outcome::Written => Ok(true),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::ImmersionLost(_) | Error::SingularMetric(_) | Error::TooCoarse { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => usage_error(&format!("error: {e}")),
    }
}
