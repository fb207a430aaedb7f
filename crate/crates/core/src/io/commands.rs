//! Subcommand implementations shared by the binary and the tests.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::bell::{chsh, max_chsh};
use crate::coincidence::{scan_spectrum, Axis, Spectrum, SpectrumPoint};
use crate::error::{Error, Result};
use crate::montecarlo::{accidental_fraction, mc_spectrum};
use crate::perturbation::level_energies;

use super::config::{load_config, ChshSection, Experiment, Format, RunConfig, SweepMode};
use super::output::{
    config_hash, BetaPoint, ChshPayload, CountsPayload, Envelope, LevelsPayload, Meta, Payload, RatePayload,
    SpectrumPayload, VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Levels,
    Rate,
    Sweep,
    Mc,
    Chsh,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Levels => "levels",
            Command::Rate => "rate",
            Command::Sweep => "sweep",
            Command::Mc => "mc",
            Command::Chsh => "chsh",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Sweep => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub override_validation: bool,
}

/// Applies command-line overrides to a loaded configuration.
pub fn apply_overrides(cfg: &mut RunConfig, seed: Option<u64>, override_validation: bool) -> Result<()> {
    if let Some(seed) = seed {
        if seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed {seed} exceeds {}", i64::MAX)));
        }
        match cfg.monte_carlo.as_mut() {
            Some(mc) => mc.seed = seed,
            None => return Err(Error::Config("--seed given but the configuration has no [monte_carlo] section".into())),
        }
    }
    cfg.options.override_validation |= override_validation;
    Ok(())
}

fn require<'a, T>(section: &'a Option<T>, name: &str, cmd: Command) -> Result<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| Error::Config(format!("subcommand `{}` needs a [{name}] section", cmd.name())))
}

/// Runs one subcommand on an in-memory configuration.
pub fn build_envelope(command: Command, cfg: RunConfig) -> Result<Envelope> {
    let exp = cfg.experiment()?;
    let validation = exp.validate()?;
    let override_validation = cfg.options.override_validation;
    let payload = if validation.is_valid() || override_validation {
        Some(payload(command, &cfg, &exp)?)
    } else {
        None
    };
    let seed = cfg.monte_carlo.map(|m| m.seed);
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = Meta {
        version: VERSION.to_owned(),
        subcommand: command.name().to_owned(),
        timestamp,
        seed,
        config_hash: config_hash(&cfg)?,
        override_validation,
    };
    Ok(Envelope { config: cfg, meta, payload, validation })
}

fn payload(command: Command, cfg: &RunConfig, exp: &Experiment) -> Result<Payload> {
    let model = exp.model();
    Ok(match command {
        Command::Levels => {
            let l = exp.levels;
            let lv = |n| level_energies(&exp.system, n, exp.gup.deformation, &exp.units);
            Payload::Levels(LevelsPayload {
                system: exp.system.name().to_owned(),
                n: [l.n1, l.n2, l.n3],
                levels: [lv(l.n1)?, lv(l.n2)?, lv(l.n3)?],
                delta_e: exp.delta_e,
                delta_e_p: exp.delta_e_p,
            })
        }
        Command::Rate => {
            let (_, clamped) = model.terms.corrected(exp.gup.beta);
            Payload::Rate(RatePayload {
                rate: model.rate()?,
                rate_beta0: model.with_beta(0.0).rate()?,
                r0: model.terms.r0,
                r0_gup: model.r0_gup(),
                clamped,
                phase: model.phase()?,
                fringe_shift: model.fringe_shift(),
            })
        }
        Command::Sweep => {
            let sweep = require(&cfg.sweep, "sweep", command)?;
            let range = sweep.range()?;
            if sweep.beta_pair && sweep.axis == Axis::Beta {
                return Err(Error::Config("beta_pair cannot be combined with a beta sweep".into()));
            }
            let (spectrum, records) = match sweep.mode {
                SweepMode::Analytic => (scan_spectrum(&model, sweep.axis, &range)?, Vec::new()),
                SweepMode::Mc => {
                    let mc = require(&cfg.monte_carlo, "monte_carlo", command)?;
                    mc_spectrum(&exp.simulator()?, sweep.axis, &range.values(), mc.n_pairs, mc.seed)?
                }
            };
            let beta0 = if sweep.beta_pair {
                let s = scan_spectrum(&model.with_beta(0.0), sweep.axis, &range)?;
                Some(match sweep.mode {
                    SweepMode::Analytic => s,
                    // Analytic overlay in coincidences per pair.
                    SweepMode::Mc => {
                        let scale = exp.ifc.eta1 * exp.ifc.eta2 / model.terms.r0;
                        let points = s.points.iter().map(|p| SpectrumPoint { rate: p.rate * scale, ..*p }).collect();
                        Spectrum::new(s.axis, points)?
                    }
                })
            } else {
                None
            };
            Payload::Spectrum(SpectrumPayload { spectrum, beta0, records, fringe_shift: model.fringe_shift() })
        }
        Command::Mc => {
            let mc = require(&cfg.monte_carlo, "monte_carlo", command)?;
            let sim = exp.simulator()?;
            let record = sim.run(mc.n_pairs, mc.seed)?;
            let expected_fraction = 0.5 * exp.ifc.eta1 * exp.ifc.eta2 * sim.channel_probability()?;
            Payload::Counts(CountsPayload { accidental_fraction: accidental_fraction(&record), record, expected_fraction })
        }
        Command::Chsh => {
            let section = cfg.chsh.clone().unwrap_or_default();
            chsh_payload(&section, exp)?
        }
    })
}

fn chsh_payload(section: &ChshSection, exp: &Experiment) -> Result<Payload> {
    let model = exp.model();
    let max = max_chsh(&model, section.search())?;
    let fixed = section.fixed_settings();
    let fixed_result = fixed.map(|s| chsh(&model, s)).transpose()?;
    let beta_scan = match fixed {
        Some(s) => section
            .beta_values
            .iter()
            .map(|&beta| Ok(BetaPoint { beta, s_value: chsh(&model.with_beta(beta), s)?.s_value }))
            .collect::<Result<Vec<_>>>()?,
        None if !section.beta_values.is_empty() => {
            return Err(Error::Config("chsh.beta_values needs chsh.settings".into()));
        }
        None => Vec::new(),
    };
    Ok(Payload::Chsh(ChshPayload { max, fixed: fixed_result, beta_scan, fringe_shift: model.fringe_shift() }))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.to_owned(), source }),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

/// Writes an envelope in the requested format.
pub fn write_envelope(env: &Envelope, format: Format, path: Option<&Path>) -> Result<()> {
    write_output(path, &env.encode(format)?)
}

/// Loads, runs and writes. Returns the process exit code.
pub fn run(inv: &Invocation) -> Result<i32> {
    let mut cfg = load_config(&inv.config)?;
    apply_overrides(&mut cfg, inv.seed, inv.override_validation)?;
    let output = cfg.output.clone().unwrap_or(super::config::OutputSection { path: None, format: None });
    let format = inv.format.or(output.format).unwrap_or(inv.command.default_format());
    let path = inv.out.clone().or(output.path.map(PathBuf::from));
    let env = build_envelope(inv.command, cfg)?;
    write_envelope(&env, format, path.as_deref())?;
    if env.payload.is_none() {
        log::error!("configuration failed validation:\n{}", env.validation.to_string().trim_end());
        return Ok(2);
    }
    Ok(0)
}
