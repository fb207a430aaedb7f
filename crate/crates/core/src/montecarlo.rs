//! Event-level simulation of pair emission, path choice, timing and detection.
//!
//! Per pair: the path combination is uniform over {SS, SL, LS, LL}. The first
//! photon leaves at t0 ~ Exp(τ1); the second follows after an Exp(τ2) delay.
//! The long arm adds ΔT. A pair reaches both detector ports with probability
//! 1/4 on a distinguishable (SL, LS) path and with g·cos²(Φ/2)/2 on the
//! interfering SS+LL channel, where g = R0^GUP/R0. Ports reached, each detector
//! fires with its efficiency; two clicks inside the window W make a coincidence.
//!
//! The expected coincident fraction is therefore η1·η2·g·cos²(Φ/2)/4 up to
//! window losses and accidental cross-path leakage, both of which are
//! exponentially small when τ2 ≪ W < ΔT.
//!
//! Results are bit-identical for a given seed on one platform. Floating-point
//! libm differences mean only statistical equality is promised across platforms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coincidence::{Axis, FransonModel, Spectrum, SpectrumPoint};
use crate::error::{ensure_finite, Error, Result};
use crate::model::{CascadeSpec, InterferometerConfig, ModeCoefficients};
use crate::rng::{derive_seed, SimRng};

const SHARD_PAIRS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathPair {
    SS,
    SL,
    LS,
    LL,
}

impl PathPair {
    fn from_bits(bits: u64) -> Self {
        match bits & 3 {
            0 => PathPair::SS,
            1 => PathPair::SL,
            2 => PathPair::LS,
            _ => PathPair::LL,
        }
    }

    pub fn is_cross(self) -> bool {
        matches!(self, PathPair::SL | PathPair::LS)
    }

    fn long_a(self) -> bool {
        matches!(self, PathPair::LS | PathPair::LL)
    }

    fn long_b(self) -> bool {
        matches!(self, PathPair::SL | PathPair::LL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEvent {
    pub t0: f64,
    pub path: PathPair,
    pub t_a: f64,
    pub t_b: f64,
    pub detected: (bool, bool),
    pub coincident: bool,
}

/// Energy bookkeeping that sets the interference phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub delta_e: f64,
    pub delta_e_p: f64,
    pub beta: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
struct Tally {
    coincident: u64,
    accidental: u64,
    cross_rejected: u64,
    late: u64,
    singles: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            coincident: self.coincident + o.coincident,
            accidental: self.accidental + o.accidental,
            cross_rejected: self.cross_rejected + o.cross_rejected,
            late: self.late + o.late,
            singles: self.singles + o.singles,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n_pairs: u64,
    /// All in-window two-click events, accidentals included.
    pub n_coincident: u64,
    /// Coincidences that came from a distinguishable (SL/LS) path.
    pub n_accidental: u64,
    /// Cross-path two-click events discarded by the window.
    pub n_cross_rejected: u64,
    /// Interfering-channel two-click events whose delay exceeded the window.
    pub n_late: u64,
    /// Exactly one detector fired.
    pub n_singles: u64,
    pub rate_estimate: f64,
    pub std_error: f64,
    pub seed: u64,
}

impl CountRecord {
    fn from_tally(n_pairs: u64, t: Tally, seed: u64) -> Self {
        let p = t.coincident as f64 / n_pairs as f64;
        Self {
            n_pairs,
            n_coincident: t.coincident,
            n_accidental: t.accidental,
            n_cross_rejected: t.cross_rejected,
            n_late: t.late,
            n_singles: t.singles,
            rate_estimate: p,
            std_error: (p * (1.0 - p) / n_pairs as f64).sqrt(),
            seed,
        }
    }
}

/// A configured experiment ready to generate events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulator {
    pub cascade: CascadeSpec,
    pub ifc: InterferometerConfig,
    pub model: FransonModel,
}

impl Simulator {
    pub fn new(
        cascade: &CascadeSpec,
        ifc: &InterferometerConfig,
        phase: &PhaseParams,
        modes: &ModeCoefficients,
    ) -> Result<Self> {
        let model = FransonModel::ideal(modes, phase.beta, phase.delta_e, phase.delta_e_p, ifc.delta_t, phase.hbar)
            .with_phases(ifc.phi1, ifc.phi2);
        let sim = Self { cascade: *cascade, ifc: *ifc, model };
        sim.channel_probability()?;
        Ok(sim)
    }

    pub fn with_damping(mut self) -> Self {
        self.model = self.model.with_damping(&self.cascade);
        self
    }

    pub fn with_phases(mut self, phi1: f64, phi2: f64) -> Self {
        self.ifc.phi1 = phi1;
        self.ifc.phi2 = phi2;
        self.model = self.model.with_phases(phi1, phi2);
        self
    }

    pub fn with_axis(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::Phi1 => self.ifc.phi1 = value,
            Axis::Phi2 => self.ifc.phi2 = value,
            Axis::DeltaT => self.ifc.delta_t = value,
            Axis::Beta => {}
        }
        self.model = self.model.with_axis(axis, value);
        self
    }

    /// Probability that an SS/LL pair reaches both detector ports.
    pub fn channel_probability(&self) -> Result<f64> {
        let c = &self.cascade;
        for (v, name) in [(c.tau1, "tau1"), (c.tau2, "tau2"), (self.ifc.window, "window")] {
            ensure_finite(v, name)?;
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (v, name) in [(self.ifc.eta1, "eta1"), (self.ifc.eta2, "eta2")] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        let phase = self.model.phase()?;
        if self.model.terms.r0 <= 0.0 {
            return Err(Error::InvalidParameter("unperturbed pair rate must be positive".into()));
        }
        let ratio = self.model.r0_gup() / self.model.terms.r0;
        if ratio > 2.0 {
            return Err(Error::NonPerturbative { ratio });
        }
        Ok(0.5 * ratio * self.model.fringe_factor(phase.total))
    }

    /// Draws one pair. `p_channel` is [`Simulator::channel_probability`].
    #[inline]
    pub fn sample_event(&self, rng: &mut SimRng, p_channel: f64) -> PairEvent {
        let path = PathPair::from_bits(rng.next_u64());
        let dt = self.ifc.delta_t;
        let t0 = rng.exponential(self.cascade.tau1);
        let delay = rng.exponential(self.cascade.tau2);
        let t_a = t0 + if path.long_a() { dt } else { 0.0 };
        let t_b = t0 + delay + if path.long_b() { dt } else { 0.0 };
        let p_ports = if path.is_cross() { 0.25 } else { p_channel };
        let detected = if rng.bernoulli(p_ports) {
            (rng.bernoulli(self.ifc.eta1), rng.bernoulli(self.ifc.eta2))
        } else {
            (false, false)
        };
        let coincident = detected.0 && detected.1 && (t_a - t_b).abs() <= self.ifc.window;
        PairEvent { t0, path, t_a, t_b, detected, coincident }
    }

    fn run_shard(&self, seed: u64, shard: u64, pairs: u64, p_channel: f64) -> Tally {
        let mut rng = SimRng::new(seed, shard);
        let mut t = Tally::default();
        for _ in 0..pairs {
            let ev = self.sample_event(&mut rng, p_channel);
            match ev.detected {
                (true, true) if ev.coincident => {
                    t.coincident += 1;
                    t.accidental += ev.path.is_cross() as u64;
                }
                (true, true) if ev.path.is_cross() => t.cross_rejected += 1,
                (true, true) => t.late += 1,
                (true, false) | (false, true) => t.singles += 1,
                (false, false) => {}
            }
        }
        t
    }

    /// Runs `n_pairs` pairs, sharded over fixed-size independent streams.
    pub fn run(&self, n_pairs: u64, seed: u64) -> Result<CountRecord> {
        if n_pairs == 0 {
            return Err(Error::InvalidParameter("n_pairs must be at least 1".into()));
        }
        let p_channel = self.channel_probability()?;
        let shards = n_pairs.div_ceil(SHARD_PAIRS);
        let tally = (0..shards)
            .into_par_iter()
            .map(|s| {
                let pairs = SHARD_PAIRS.min(n_pairs - s * SHARD_PAIRS);
                self.run_shard(seed, s, pairs, p_channel)
            })
            .reduce(Tally::default, |a, b| a + b);
        Ok(CountRecord::from_tally(n_pairs, tally, seed))
    }
}

pub fn simulate_pairs(
    n_pairs: u64,
    cascade: &CascadeSpec,
    ifc: &InterferometerConfig,
    phase: &PhaseParams,
    modes: &ModeCoefficients,
    seed: u64,
) -> Result<CountRecord> {
    Simulator::new(cascade, ifc, phase, modes)?.run(n_pairs, seed)
}

/// Seed used for the spectrum point at `value`. Keyed by the value itself so a
/// point's result does not depend on its position in the axis.
pub fn point_seed(seed: u64, value: f64) -> u64 {
    derive_seed(seed, value.to_bits())
}

/// One simulation per axis value. The axis is sorted; duplicates are rejected.
pub fn mc_spectrum(
    sim: &Simulator,
    axis: Axis,
    values: &[f64],
    n_pairs: u64,
    seed: u64,
) -> Result<(Spectrum, Vec<CountRecord>)> {
    if values.is_empty() {
        return Err(Error::EmptyRange);
    }
    let mut sorted = values.to_vec();
    for &v in &sorted {
        ensure_finite(v, "axis value")?;
    }
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("duplicate axis values".into()));
    }
    let records = sorted
        .par_iter()
        .map(|&v| sim.with_axis(axis, v).run(n_pairs, point_seed(seed, v)))
        .collect::<Result<Vec<_>>>()?;
    let points = sorted
        .iter()
        .zip(&records)
        .map(|(&value, r)| SpectrumPoint { value, rate: r.rate_estimate, std_error: Some(r.std_error) })
        .collect();
    Ok((Spectrum::new(axis, points)?, records))
}

/// Share of coincidences that came from distinguishable paths.
pub fn accidental_fraction(record: &CountRecord) -> f64 {
    if record.n_coincident == 0 {
        0.0
    } else {
        record.n_accidental as f64 / record.n_coincident as f64
    }
}
