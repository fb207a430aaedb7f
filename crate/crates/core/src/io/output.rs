//! Result envelopes and their CSV / JSON encodings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bell::ChshResult;
use crate::coincidence::{PhaseDecomposition, Spectrum};
use crate::error::{Error, Result};
use crate::model::ValidationReport;
use crate::montecarlo::CountRecord;
use crate::perturbation::LevelEnergies;

use super::config::{Format, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub subcommand: String,
    /// Seconds since the Unix epoch. Absent from CSV output.
    pub timestamp: u64,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub override_validation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub config: RunConfig,
    pub meta: Meta,
    /// `None` when validation failed and was not overridden.
    pub payload: Option<Payload>,
    pub validation: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Levels(LevelsPayload),
    Rate(RatePayload),
    Spectrum(SpectrumPayload),
    Counts(CountsPayload),
    Chsh(ChshPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelsPayload {
    pub system: String,
    pub n: [u32; 3],
    pub levels: [LevelEnergies; 3],
    pub delta_e: f64,
    pub delta_e_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePayload {
    pub rate: f64,
    pub rate_beta0: f64,
    pub r0: f64,
    pub r0_gup: f64,
    pub clamped: bool,
    pub phase: PhaseDecomposition,
    pub fringe_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPayload {
    pub spectrum: Spectrum,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<Spectrum>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<CountRecord>,
    pub fringe_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsPayload {
    pub record: CountRecord,
    pub accidental_fraction: f64,
    /// Coincidences per pair predicted without window losses or leakage.
    pub expected_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPoint {
    pub beta: f64,
    pub s_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshPayload {
    pub max: ChshResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<ChshResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta_scan: Vec<BetaPoint>,
    pub fringe_shift: f64,
}

/// SHA-256 of the canonical TOML form, hex encoded.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let digest = Sha256::digest(cfg.to_toml()?.as_bytes());
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl Envelope {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// CSV with a `#` metadata header. Contains nothing time dependent, so
    /// identical inputs give identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let _ = writeln!(out, "# franson {} {}", m.version, m.subcommand);
        let _ = writeln!(out, "# config_hash: {}", m.config_hash);
        if let Some(seed) = m.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        if m.override_validation {
            let _ = writeln!(out, "# override_validation: true");
        }
        for v in &self.validation.violations {
            let _ = writeln!(out, "# violation: {v}");
        }
        for w in &self.validation.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        match &self.payload {
            None => {}
            Some(Payload::Spectrum(p)) => spectrum_rows(&mut out, p),
            Some(p) => {
                out.push_str("key,value\n");
                for (k, v) in key_values(p) {
                    let _ = writeln!(out, "{k},{v}");
                }
            }
        }
        out
    }

    pub fn encode(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json().map(|s| s + "\n"),
        }
    }
}

fn spectrum_rows(out: &mut String, p: &SpectrumPayload) {
    let has_err = p.spectrum.points.iter().any(|pt| pt.std_error.is_some());
    out.push_str("axis_name,axis_value,rate");
    if has_err {
        out.push_str(",std_error");
    }
    if p.beta0.is_some() {
        out.push_str(",rate_beta0");
    }
    out.push('\n');
    let name = p.spectrum.axis.name();
    for (i, pt) in p.spectrum.points.iter().enumerate() {
        let _ = write!(out, "{name},{},{}", num(pt.value), num(pt.rate));
        if has_err {
            let _ = write!(out, ",{}", num(pt.std_error.unwrap_or(f64::NAN)));
        }
        if let Some(b) = &p.beta0 {
            let _ = write!(out, ",{}", num(b.points[i].rate));
        }
        out.push('\n');
    }
}

fn key_values(p: &Payload) -> Vec<(String, String)> {
    let mut kv: Vec<(String, String)> = Vec::new();
    let mut f = |k: &str, v: f64| kv.push((k.to_owned(), num(v)));
    match p {
        Payload::Levels(l) => {
            for (i, lv) in l.levels.iter().enumerate() {
                f(&format!("e{}", i + 1), lv.e);
                f(&format!("e_p{}", i + 1), lv.e_p);
            }
            f("delta_e", l.delta_e);
            f("delta_e_p", l.delta_e_p);
        }
        Payload::Rate(r) => {
            f("rate", r.rate);
            f("rate_beta0", r.rate_beta0);
            f("r0", r.r0);
            f("r0_gup", r.r0_gup);
            f("phi1_prime", r.phase.phi1_prime);
            f("phi2_prime", r.phase.phi2_prime);
            f("total_phase", r.phase.total);
            f("fringe_shift", r.fringe_shift);
        }
        Payload::Counts(c) => {
            let r = &c.record;
            f("rate_estimate", r.rate_estimate);
            f("std_error", r.std_error);
            f("accidental_fraction", c.accidental_fraction);
            f("expected_fraction", c.expected_fraction);
        }
        Payload::Chsh(c) => {
            let mut result = |prefix: &str, r: &ChshResult| {
                f(&format!("{prefix}s_value"), r.s_value);
                let s = r.settings;
                for (k, v) in [("a", s.a), ("a_prime", s.a_prime), ("b", s.b), ("b_prime", s.b_prime)] {
                    f(&format!("{prefix}{k}"), v);
                }
            };
            result("max_", &c.max);
            if let Some(fixed) = &c.fixed {
                result("fixed_", fixed);
            }
            for pt in &c.beta_scan {
                f(&format!("fixed_s_value@beta={}", num(pt.beta)), pt.s_value);
            }
            f("fringe_shift", c.fringe_shift);
        }
        Payload::Spectrum(_) => {}
    }
    match p {
        Payload::Levels(l) => {
            for (i, n) in l.n.iter().enumerate() {
                kv.push((format!("n{}", i + 1), n.to_string()));
            }
        }
        Payload::Rate(r) => kv.push(("clamped".into(), r.clamped.to_string())),
        Payload::Counts(c) => {
            let r = &c.record;
            for (k, v) in [
                ("n_pairs", r.n_pairs),
                ("n_coincident", r.n_coincident),
                ("n_accidental", r.n_accidental),
                ("n_cross_rejected", r.n_cross_rejected),
                ("n_late", r.n_late),
                ("n_singles", r.n_singles),
            ] {
                kv.push((k.into(), v.to_string()));
            }
        }
        _ => {}
    }
    kv
}
