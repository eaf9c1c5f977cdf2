//! Command-line front end for `warwalk`: experiment runs, sweeps, verification and replay.
//!
//! Exit codes: 0 success, 1 a verification or replay check failed, 2 bad usage or config.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use args::{Cli, Command};
pub use commands::{run_experiment, Output};
pub use manifest::ExperimentManifest;

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub fn execute(cli: &Cli) -> anyhow::Result<Output> {
    match &cli.command {
        Command::Walk(a) => commands::cmd_walk(a),
        Command::Sweep(a) => commands::cmd_sweep(a),
        Command::Pwar(a) => commands::cmd_pwar(a),
        Command::Fwar(a) => commands::cmd_fwar(a),
        Command::War(a) => commands::cmd_war(a),
        Command::Verify(a) => commands::cmd_verify(a),
        Command::Replay(a) => commands::cmd_replay(a),
    }
}
