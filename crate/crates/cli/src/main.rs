//! `antipt`: command-line front end for the anti-PT sensing model.

mod args;
mod commands;
mod config;
mod error;
mod output;
mod sweep_io;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use commands::{PoleFitRequest, QcrbRequest, ValidateRequest};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config::load(cli.config.as_deref())?;
    let table = match &cli.command {
        Command::Spectrum {
            system,
            delta_range,
        } => commands::spectrum(system, delta_range.as_deref(), &cfg)?,
        Command::Phase { system, ep_tol } => commands::phase(system, *ep_tol, &cfg)?,
        Command::Critical { system } => commands::critical(system, &cfg)?,
        Command::Qcrb {
            system,
            probe,
            epsilon,
            omega_range,
            log,
        } => commands::qcrb(
            QcrbRequest {
                system,
                probe,
                epsilon: *epsilon,
                omega_range: omega_range.as_deref(),
                log: *log,
            },
            &cfg,
        )?,
        Command::Laurent {
            system,
            epsilon,
            radii,
        } => commands::laurent(system, *epsilon, radii.as_deref(), &cfg)?,
        Command::PoleFit {
            input,
            omega0,
            window,
            derivative_step,
        } => commands::pole_fit(
            PoleFitRequest {
                input: input.as_deref(),
                omega0: *omega0,
                window: window.as_deref(),
                derivative_step: *derivative_step,
            },
            &cfg,
        )?,
        Command::Validate {
            preset,
            system,
            samples,
            seed,
        } => commands::validate(
            ValidateRequest {
                preset: *preset,
                system,
                samples: *samples,
                seed: *seed,
            },
            &cfg,
        )?,
    };

    let format = cli.format.or(cfg.output.format).unwrap_or(Format::Csv);
    let bytes = table.render(format);
    match cli.output.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write standard output: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
