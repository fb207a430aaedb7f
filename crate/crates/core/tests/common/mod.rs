#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use franson_core::model::{CascadeSpec, InterferometerConfig, ModeCoefficients};
use franson_core::montecarlo::{PhaseParams, Simulator};

/// ΔE·ΔT = 2π·k so the dynamic phase drops out of cos².
pub const DELTA_T: f64 = 10.0;
pub const DELTA_E: f64 = 2.0 * PI / DELTA_T;

pub fn cascade() -> CascadeSpec {
    CascadeSpec { e1: 2.0 * DELTA_E, e2: 1.5 * DELTA_E, e3: DELTA_E, tau1: 100.0, tau2: 0.1, tau3: 1000.0 }
}

pub fn interferometer() -> InterferometerConfig {
    InterferometerConfig { delta_t: DELTA_T, phi1: 0.0, phi2: 0.0, eta1: 1.0, eta2: 1.0, window: 1.0 }
}

pub fn simulator(beta: f64, delta_e_p: f64, ifc: InterferometerConfig) -> Simulator {
    let phase = PhaseParams { delta_e: cascade().delta_e(), delta_e_p, beta, hbar: 1.0 };
    Simulator::new(&cascade(), &ifc, &phase, &ModeCoefficients::single()).unwrap()
}

/// Least-squares fit of y = a + b·cos x + c·sin x.
#[derive(Debug, Clone, Copy)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    /// Shift δ in cos²((x + δ)/2).
    pub delta: f64,
    pub delta_err: f64,
}

pub fn fit_fringe(xs: &[f64], ys: &[f64]) -> FringeFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() > 3);
    let mut xtx = Matrix3::zeros();
    let mut xty = Vector3::zeros();
    for (&x, &y) in xs.iter().zip(ys) {
        let row = Vector3::new(1.0, x.cos(), x.sin());
        xtx += row * row.transpose();
        xty += row * y;
    }
    let inv = xtx.try_inverse().expect("singular design");
    let p = inv * xty;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - p[0] - p[1] * x.cos() - p[2] * x.sin()).powi(2))
        .sum();
    let cov = inv * (rss / (xs.len() - 3) as f64);
    let (b, c) = (p[1], p[2]);
    let r2 = b * b + c * c;
    let var = (c * c * cov[(1, 1)] + b * b * cov[(2, 2)] - 2.0 * b * c * cov[(1, 2)]) / (r2 * r2);
    FringeFit { offset: p[0], amplitude: r2.sqrt(), delta: (-c).atan2(b), delta_err: var.sqrt() }
}

/// Expected per-pair coincidence and accidental probabilities for the
/// event model, from the exponential delay distribution.
#[derive(Debug, Clone, Copy)]
pub struct TailOracle {
    pub coincident: f64,
    pub accidental: f64,
}

impl TailOracle {
    pub fn fraction(&self) -> f64 {
        self.accidental / self.coincident
    }
}

pub fn tail_oracle(sim: &Simulator) -> TailOracle {
    let (w, dt, tau2) = (sim.ifc.window, sim.ifc.delta_t, sim.cascade.tau2);
    let eta = sim.ifc.eta1 * sim.ifc.eta2;
    let p_ss = 1.0 - (-w / tau2).exp();
    // t_b − t_a = delay + ΔT on SL, delay − ΔT on LS.
    let p_sl = if w > dt { 1.0 - (-(w - dt) / tau2).exp() } else { 0.0 };
    let p_ls = (-(dt - w).max(0.0) / tau2).exp() - (-(dt + w) / tau2).exp();
    let accidental = 0.5 * 0.25 * eta * 0.5 * (p_sl + p_ls);
    let channel = sim.channel_probability().unwrap();
    let interfering = 0.5 * channel * eta * p_ss;
    TailOracle { coincident: accidental + interfering, accidental }
}

pub fn binomial_se(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}
