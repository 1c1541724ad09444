//! Command-line front end: argument parsing, configuration and the
//! individual subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

use config::{CommandKind, RunConfig};
use error::CliError;

/// Dispatches a resolved configuration.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        CommandKind::Periodic => commands::periodic(cfg),
        CommandKind::Simulate => commands::simulate(cfg),
        CommandKind::Spectrum => commands::spectrum(cfg),
        CommandKind::Sirs => commands::sirs(cfg),
        CommandKind::Verify => verify::verify(cfg),
        CommandKind::Bifurcation => commands::bifurcation(cfg),
    }
}
