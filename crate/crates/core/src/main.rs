use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use franson_core::io::{self, Command, Format, Invocation};

#[derive(Parser)]
#[command(name = "franson", version, about = "Two-photon interference with minimal-length corrections")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Fmt>,
    /// Replaces the [monte_carlo] seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Produce results even when validation fails.
    #[arg(long, global = true)]
    override_validation: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Level energies and their first-order shifts.
    Levels,
    /// Coincidence rate at the configured phases.
    Rate,
    /// Rate spectrum over the [sweep] axis.
    Sweep,
    /// Event-level simulation.
    Mc,
    /// CHSH value: maximum over settings, plus optional fixed settings.
    Chsh,
}

#[derive(ValueEnum, Clone, Copy)]
enum Fmt {
    Csv,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let Some(config) = args.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(4);
    };
    let command = match args.command {
        Cmd::Levels => Command::Levels,
        Cmd::Rate => Command::Rate,
        Cmd::Sweep => Command::Sweep,
        Cmd::Mc => Command::Mc,
        Cmd::Chsh => Command::Chsh,
    };
    let inv = Invocation {
        command,
        config,
        out: args.out,
        format: args.format.map(|f| match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        }),
        seed: args.seed,
        override_validation: args.override_validation,
    };
    match io::run(&inv) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
