//! Run configuration: a TOML document with one table per concern.
//!
//! Parsing is strict. Every unknown key and every missing required key is
//! collected and reported in a single error before any typed decoding.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::{ChshSearch, ChshSettings};
use crate::coincidence::{Axis, FransonModel, SweepRange};
use crate::error::{Error, Result};
use crate::model::{
    validate_experiment, CascadeSpec, GupParams, InterferometerConfig, ModeCoefficients, UnitSystem,
    ValidationLimits, ValidationReport,
};
use crate::montecarlo::{PhaseParams, Simulator};
use crate::perturbation::{cascade_deltas, unperturbed_energy, LevelMap, ModelSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub units: UnitSystem,
    pub system: ModelSystem,
    pub levels: LevelMap,
    pub cascade: CascadeSection,
    pub interferometer: InterferometerConfig,
    pub gup: GupParams,
    #[serde(default)]
    pub modes: ModesSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chsh: Option<ChshSection>,
    #[serde(default)]
    pub options: OptionsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSection {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    #[serde(default = "default_hierarchy_min")]
    pub hierarchy_min: f64,
    #[serde(default = "default_hierarchy_margin")]
    pub hierarchy_margin: f64,
}

fn default_hierarchy_min() -> f64 {
    ValidationLimits::default().hierarchy_min
}

fn default_hierarchy_margin() -> f64 {
    ValidationLimits::default().hierarchy_margin
}

/// Complex coefficients written as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub c: Vec<[f64; 2]>,
    pub c_prime: Vec<[f64; 2]>,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self { c: vec![[1.0, 0.0]], c_prime: vec![[0.0, 0.0]] }
    }
}

impl ModesSection {
    pub fn to_modes(&self) -> Result<ModeCoefficients> {
        let conv = |v: &[[f64; 2]]| v.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ModeCoefficients::new(conv(&self.c), conv(&self.c_prime))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub n_pairs: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Analytic,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub samples: usize,
    #[serde(default)]
    pub endpoint: bool,
    #[serde(default)]
    pub mode: SweepMode,
    /// Also emit the β = 0 spectrum for overlay.
    #[serde(default)]
    pub beta_pair: bool,
}

impl SweepSection {
    pub fn range(&self) -> Result<SweepRange> {
        SweepRange::new(self.start, self.stop, self.samples, self.endpoint)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshSection {
    /// Fixed (a, a′, b, b′) at which S is also reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<[f64; 4]>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_refinements")]
    pub refinements: usize,
    /// β values for a fixed-settings S(β) scan.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta_values: Vec<f64>,
}

impl Default for ChshSection {
    fn default() -> Self {
        Self {
            settings: None,
            resolution: default_resolution(),
            refinements: default_refinements(),
            beta_values: Vec::new(),
        }
    }
}

fn default_resolution() -> usize {
    ChshSearch::default().resolution
}

fn default_refinements() -> usize {
    ChshSearch::default().refinements
}

impl ChshSection {
    pub fn search(&self) -> ChshSearch {
        ChshSearch { resolution: self.resolution, refinements: self.refinements }
    }

    pub fn fixed_settings(&self) -> Option<ChshSettings> {
        self.settings.map(|[a, ap, b, bp]| ChshSettings::new(a, ap, b, bp))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    /// Finite-linewidth fringe damping exp(−ΔT·(1/τ1 + 1/τ3)).
    #[serde(default)]
    pub damping: bool,
    #[serde(default)]
    pub override_validation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

struct SectionSchema {
    name: &'static str,
    required_section: bool,
    required: &'static [&'static str],
    optional: &'static [&'static str],
}

const SCHEMA: &[SectionSchema] = &[
    SectionSchema { name: "units", required_section: false, required: &["hbar"], optional: &[] },
    SectionSchema { name: "system", required_section: true, required: &["kind", "mass"], optional: &["omega", "width"] },
    SectionSchema { name: "levels", required_section: true, required: &["n1", "n2", "n3"], optional: &[] },
    SectionSchema {
        name: "cascade",
        required_section: true,
        required: &["tau1", "tau2", "tau3"],
        optional: &["hierarchy_min", "hierarchy_margin"],
    },
    SectionSchema {
        name: "interferometer",
        required_section: true,
        required: &["delta_t", "phi1", "phi2", "eta1", "eta2", "window"],
        optional: &[],
    },
    SectionSchema { name: "gup", required_section: true, required: &["beta"], optional: &["deformation"] },
    SectionSchema { name: "modes", required_section: false, required: &["c", "c_prime"], optional: &[] },
    SectionSchema { name: "monte_carlo", required_section: false, required: &["n_pairs", "seed"], optional: &[] },
    SectionSchema {
        name: "sweep",
        required_section: false,
        required: &["axis", "start", "stop", "samples"],
        optional: &["endpoint", "mode", "beta_pair"],
    },
    SectionSchema {
        name: "chsh",
        required_section: false,
        required: &[],
        optional: &["settings", "resolution", "refinements", "beta_values"],
    },
    SectionSchema { name: "options", required_section: false, required: &[], optional: &["damping", "override_validation"] },
    SectionSchema { name: "output", required_section: false, required: &[], optional: &["path", "format"] },
];

/// Lists every unknown and missing key of a parsed document.
fn check_keys(doc: &toml::Table) -> Vec<String> {
    let mut problems = Vec::new();
    for key in doc.keys() {
        if !SCHEMA.iter().any(|s| s.name == key) {
            problems.push(format!("unknown section `{key}`"));
        }
    }
    for section in SCHEMA {
        let Some(value) = doc.get(section.name) else {
            if section.required_section {
                problems.push(format!("missing section [{}]", section.name));
            }
            continue;
        };
        let Some(table) = value.as_table() else {
            problems.push(format!("`{}` must be a table", section.name));
            continue;
        };
        for key in table.keys() {
            if !section.required.contains(&key.as_str()) && !section.optional.contains(&key.as_str()) {
                problems.push(format!("unknown key `{}.{key}`", section.name));
            }
        }
        let mut required: Vec<&str> = section.required.to_vec();
        if section.name == "system" {
            match table.get("kind").and_then(|k| k.as_str()) {
                Some("harmonic_oscillator") => required.push("omega"),
                Some("infinite_well") => required.push("width"),
                _ => {}
            }
        }
        for key in required {
            if !table.contains_key(key) {
                problems.push(format!("missing key `{}.{key}`", section.name));
            }
        }
    }
    problems
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let problems = check_keys(&doc);
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    RunConfig::deserialize(toml::Value::Table(doc)).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    parse_config(&text)
}

impl RunConfig {
    /// Canonical TOML form; stable for identical configurations.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn limits(&self) -> ValidationLimits {
        ValidationLimits { hierarchy_min: self.cascade.hierarchy_min, hierarchy_margin: self.cascade.hierarchy_margin }
    }

    /// Resolves the configuration into physical quantities.
    pub fn experiment(&self) -> Result<Experiment> {
        let units = UnitSystem::new(self.units.hbar)?;
        self.system.check()?;
        let deformation = self.gup.deformation;
        let gup = GupParams { beta: GupParams::new(self.gup.beta)?.beta, deformation };
        let (delta_e, delta_e_p) = cascade_deltas(&self.system, &self.levels, deformation, &units)?;
        let energy = |n| unperturbed_energy(&self.system, n, &units);
        let cascade = CascadeSpec {
            e1: energy(self.levels.n1)?,
            e2: energy(self.levels.n2)?,
            e3: energy(self.levels.n3)?,
            tau1: self.cascade.tau1,
            tau2: self.cascade.tau2,
            tau3: self.cascade.tau3,
        };
        Ok(Experiment {
            units,
            system: self.system,
            levels: self.levels,
            cascade,
            ifc: self.interferometer,
            gup,
            modes: self.modes.to_modes()?,
            limits: self.limits(),
            delta_e,
            delta_e_p,
            damping: self.options.damping,
        })
    }
}

/// A configuration resolved into the quantities every command works with.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub units: UnitSystem,
    pub system: ModelSystem,
    pub levels: LevelMap,
    pub cascade: CascadeSpec,
    pub ifc: InterferometerConfig,
    pub gup: GupParams,
    pub modes: ModeCoefficients,
    pub limits: ValidationLimits,
    pub delta_e: f64,
    pub delta_e_p: f64,
    pub damping: bool,
}

impl Experiment {
    pub fn validate(&self) -> Result<ValidationReport> {
        let mut report = validate_experiment(&self.cascade, &self.ifc, &self.limits)?;
        report.warn_if_nonperturbative(&self.gup, self.delta_e, self.delta_e_p);
        Ok(report)
    }

    pub fn phase_params(&self) -> PhaseParams {
        PhaseParams { delta_e: self.delta_e, delta_e_p: self.delta_e_p, beta: self.gup.beta, hbar: self.units.hbar }
    }

    pub fn model(&self) -> FransonModel {
        let m = FransonModel::ideal(&self.modes, self.gup.beta, self.delta_e, self.delta_e_p, self.ifc.delta_t, self.units.hbar)
            .with_phases(self.ifc.phi1, self.ifc.phi2);
        if self.damping {
            m.with_damping(&self.cascade)
        } else {
            m
        }
    }

    pub fn simulator(&self) -> Result<Simulator> {
        let sim = Simulator::new(&self.cascade, &self.ifc, &self.phase_params(), &self.modes)?;
        Ok(if self.damping { sim.with_damping() } else { sim })
    }
}
