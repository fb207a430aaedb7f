//! Configuration loading, subcommands and result encoding.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{apply_overrides, build_envelope, run, write_envelope, Command, Invocation};
pub use config::{load_config, parse_config, Experiment, Format, RunConfig};
pub use output::{Envelope, Payload};
