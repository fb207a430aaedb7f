//! Level energies and their first-order minimal-length corrections.
//!
//! With the quadratic deformation P = p(1 + βp²) the kinetic term becomes
//! p²/2m + β p⁴/m + O(β²), so the correction Hamiltonian is p⁴/m and the
//! first-order shift of a non-degenerate level is ⟨n|p⁴|n⟩/m.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Deformation, UnitSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSystem {
    HarmonicOscillator { mass: f64, omega: f64 },
    InfiniteWell { mass: f64, width: f64 },
}

impl ModelSystem {
    pub fn harmonic_oscillator(mass: f64, omega: f64) -> Result<Self> {
        let sys = ModelSystem::HarmonicOscillator { mass, omega };
        sys.check()?;
        Ok(sys)
    }

    pub fn infinite_well(mass: f64, width: f64) -> Result<Self> {
        let sys = ModelSystem::InfiniteWell { mass, width };
        sys.check()?;
        Ok(sys)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSystem::HarmonicOscillator { .. } => "harmonic oscillator",
            ModelSystem::InfiniteWell { .. } => "infinite well",
        }
    }

    /// Lowest allowed quantum number.
    pub fn ground_index(&self) -> u32 {
        match self {
            ModelSystem::HarmonicOscillator { .. } => 0,
            ModelSystem::InfiniteWell { .. } => 1,
        }
    }

    pub fn mass(&self) -> f64 {
        match *self {
            ModelSystem::HarmonicOscillator { mass, .. } | ModelSystem::InfiniteWell { mass, .. } => mass,
        }
    }

    pub fn check(&self) -> Result<()> {
        let (a, b, what) = match *self {
            ModelSystem::HarmonicOscillator { mass, omega } => (mass, omega, "omega"),
            ModelSystem::InfiniteWell { mass, width } => (mass, width, "width"),
        };
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("{what} must be positive, got {b}")));
        }
        Ok(())
    }

    fn check_level(&self, n: u32) -> Result<()> {
        self.check()?;
        if n < self.ground_index() {
            return Err(Error::InvalidQuantumNumber { n, system: self.name() });
        }
        Ok(())
    }
}

/// Quantum numbers assigned to cascade levels 1, 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMap {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
}

impl LevelMap {
    pub fn validate(&self, sys: &ModelSystem) -> Result<()> {
        let LevelMap { n1, n2, n3 } = *self;
        if !(n1 > n2 && n2 > n3) {
            return Err(Error::InvalidLevelMap(format!("need n1 > n2 > n3, got ({n1}, {n2}, {n3})")));
        }
        if n3 < sys.ground_index() {
            return Err(Error::InvalidLevelMap(format!(
                "n3 = {n3} is below the {} ground index {}",
                sys.name(),
                sys.ground_index()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEnergies {
    pub e: f64,
    /// First-order coefficient: the corrected level is `e + beta * e_p`.
    pub e_p: f64,
}

pub fn unperturbed_energy(sys: &ModelSystem, n: u32, units: &UnitSystem) -> Result<f64> {
    sys.check_level(n)?;
    let hbar = units.hbar;
    Ok(match *sys {
        ModelSystem::HarmonicOscillator { omega, .. } => hbar * omega * (n as f64 + 0.5),
        ModelSystem::InfiniteWell { mass, width } => {
            let k = n as f64 * PI * hbar / width;
            k * k / (2.0 * mass)
        }
    })
}

/// Closed-form ⟨n|p⁴|n⟩/m.
pub fn perturbation_energy(
    sys: &ModelSystem,
    n: u32,
    deformation: Deformation,
    units: &UnitSystem,
) -> Result<f64> {
    sys.check_level(n)?;
    match deformation {
        Deformation::QuadraticMomentum => {}
    }
    let hbar = units.hbar;
    Ok(match *sys {
        ModelSystem::HarmonicOscillator { mass, omega } => {
            let nf = n as f64;
            mass * hbar * hbar * omega * omega / 4.0 * (6.0 * nf * nf + 6.0 * nf + 3.0)
        }
        ModelSystem::InfiniteWell { mass, width } => (n as f64 * PI * hbar / width).powi(4) / mass,
    })
}

pub fn level_energies(
    sys: &ModelSystem,
    n: u32,
    deformation: Deformation,
    units: &UnitSystem,
) -> Result<LevelEnergies> {
    Ok(LevelEnergies {
        e: unperturbed_energy(sys, n, units)?,
        e_p: perturbation_energy(sys, n, deformation, units)?,
    })
}

/// Independent evaluation of ⟨n|p⁴|n⟩/m.
///
/// Oscillator: p⁴ is assembled as a dense matrix in a truncated number basis of
/// `basis_size` states from ladder-operator elements, and its (n, n) entry is read
/// off. The diagonal is exact once the basis holds n + 2 states.
///
/// Well: ∫|p²ψ_n|² dx is integrated with composite Gauss–Legendre on
/// `basis_size` panels.
pub fn perturbation_energy_oracle(
    sys: &ModelSystem,
    n: u32,
    basis_size: usize,
    units: &UnitSystem,
) -> Result<f64> {
    sys.check_level(n)?;
    let need = n as usize + 20;
    if basis_size < need {
        return Err(Error::BasisTooSmall { n, basis: basis_size, need });
    }
    let hbar = units.hbar;
    Ok(match *sys {
        ModelSystem::HarmonicOscillator { mass, omega } => {
            // p = i·sqrt(mħω/2)·(a† − a), and i⁴ = 1.
            let q = ladder_difference(basis_size);
            let q2 = &q * &q;
            let q4 = &q2 * &q2;
            let scale = mass * hbar * omega / 2.0;
            scale * scale * q4[(n as usize, n as usize)] / mass
        }
        ModelSystem::InfiniteWell { mass, width } => {
            let norm = (2.0 / width).sqrt();
            let k = n as f64 * PI / width;
            // p²ψ = −ħ² ψ''
            let p2_psi = |x: f64| hbar * hbar * norm * k * k * (k * x).sin();
            let integral = gauss_legendre_composite(|x| p2_psi(x).powi(2), 0.0, width, basis_size);
            integral / mass
        }
    })
}

/// a† − a in the number basis {|0⟩, …, |size−1⟩}.
fn ladder_difference(size: usize) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::zeros(size, size);
    for m in 0..size - 1 {
        let s = ((m + 1) as f64).sqrt();
        // ⟨m+1|a†|m⟩ = √(m+1), ⟨m|a|m+1⟩ = √(m+1)
        q[(m + 1, m)] = s;
        q[(m, m + 1)] = -s;
    }
    q
}

const GL_ORDER: usize = 16;

fn gauss_legendre_nodes() -> ([f64; GL_ORDER], [f64; GL_ORDER]) {
    let mut x = [0.0; GL_ORDER];
    let mut w = [0.0; GL_ORDER];
    let n = GL_ORDER;
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn gauss_legendre_composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre_nodes();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let panel: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + half * xi)).sum();
        total += half * panel;
    }
    total
}

/// (ΔE, ΔE_p) between cascade levels 1 and 3, with ΔE = E1 − E3 > 0.
pub fn cascade_deltas(
    sys: &ModelSystem,
    levels: &LevelMap,
    deformation: Deformation,
    units: &UnitSystem,
) -> Result<(f64, f64)> {
    levels.validate(sys)?;
    let top = level_energies(sys, levels.n1, deformation, units)?;
    let bottom = level_energies(sys, levels.n3, deformation, units)?;
    Ok((top.e - bottom.e, top.e_p - bottom.e_p))
}
