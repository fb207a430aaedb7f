//! Shared domain types and experiment validation.
//!
//! Everything here is an immutable value object. Internally the crate works in
//! natural units (ℏ = 1 by default); [`UnitSystem`] carries ℏ explicitly so that
//! callers with other unit conventions can rescale at the boundary.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
}

impl UnitSystem {
    pub const NATURAL: UnitSystem = UnitSystem { hbar: 1.0 };

    pub fn new(hbar: f64) -> Result<Self> {
        if hbar.is_finite() && hbar > 0.0 {
            Ok(Self { hbar })
        } else {
            Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")))
        }
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Three-level emitter: E1 decays to E2, which decays to the long-lived E3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

impl CascadeSpec {
    /// Energy released over the full cascade, E1 − E3.
    pub fn delta_e(&self) -> f64 {
        self.e1 - self.e3
    }

    /// Width of ω1 + ω2, 1/τ1 + 1/τ3.
    pub fn sum_frequency_width(&self) -> f64 {
        1.0 / self.tau1 + 1.0 / self.tau3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    /// Long-minus-short arm transit time ΔT, shared by both interferometers.
    pub delta_t: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Coincidence window W.
    pub window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deformation {
    /// f(p) = p², so P = p(1 + βp²).
    #[default]
    QuadraticMomentum,
}

impl fmt::Display for Deformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deformation::QuadraticMomentum => f.write_str("quadratic_momentum"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GupParams {
    pub beta: f64,
    #[serde(default)]
    pub deformation: Deformation,
}

impl GupParams {
    pub fn new(beta: f64) -> Result<Self> {
        ensure_finite(beta, "beta")?;
        if beta < 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be non-negative, got {beta}")));
        }
        Ok(Self { beta, deformation: Deformation::QuadraticMomentum })
    }

    /// Relative size of the first-order energy shift, β·ΔE_p/ΔE.
    pub fn relative_shift(&self, delta_e: f64, delta_e_p: f64) -> f64 {
        (self.beta * delta_e_p / delta_e).abs()
    }
}

/// Finite Fourier coefficient sequences c_k and their first-order corrections c′_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    c: Vec<Complex64>,
    c_prime: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn new(c: Vec<Complex64>, c_prime: Vec<Complex64>) -> Result<Self> {
        if c.len() != c_prime.len() {
            return Err(Error::ModeLengthMismatch { c: c.len(), c_prime: c_prime.len() });
        }
        if c.is_empty() {
            return Err(Error::InvalidParameter("mode sequences must be non-empty".into()));
        }
        if c.iter().chain(&c_prime).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("mode coefficient"));
        }
        if c.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::InvalidParameter("at least one c_k must be nonzero".into()));
        }
        Ok(Self { c, c_prime })
    }

    /// A single unit mode with no correction.
    pub fn single() -> Self {
        Self { c: vec![Complex64::new(1.0, 0.0)], c_prime: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn c(&self) -> &[Complex64] {
        &self.c
    }

    pub fn c_prime(&self) -> &[Complex64] {
        &self.c_prime
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

/// Thresholds that turn the "much less than" relations of the setup into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationLimits {
    /// Minimum τ1/τ2.
    pub hierarchy_min: f64,
    /// Factor used for τ2 ≪ ΔT ≪ τ1.
    pub hierarchy_margin: f64,
}

impl Default for ValidationLimits {
    fn default() -> Self {
        Self { hierarchy_min: 100.0, hierarchy_margin: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EnergyOrdering { e1: f64, e2: f64, e3: f64 },
    NonPositiveLifetime { name: String, value: f64 },
    LifetimeOrdering { detail: String },
    LifetimeHierarchy { ratio: f64, required: f64 },
    DeltaTTooShort { delta_t: f64, limit: f64 },
    DeltaTTooLong { delta_t: f64, limit: f64 },
    NonPositiveWindow { window: f64 },
    WindowNotSmallerThanDeltaT { window: f64, delta_t: f64 },
    EfficiencyOutOfRange { name: String, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EnergyOrdering { e1, e2, e3 } => {
                write!(f, "energies must satisfy E1 > E2 > E3 (got {e1}, {e2}, {e3})")
            }
            Violation::NonPositiveLifetime { name, value } => {
                write!(f, "lifetime {name} must be positive (got {value})")
            }
            Violation::LifetimeOrdering { detail } => write!(f, "lifetime ordering: {detail}"),
            Violation::LifetimeHierarchy { ratio, required } => {
                write!(f, "tau1/tau2 = {ratio} is below the required hierarchy {required}")
            }
            Violation::DeltaTTooShort { delta_t, limit } => {
                write!(f, "delta_t = {delta_t} is below margin*tau2 = {limit}")
            }
            Violation::DeltaTTooLong { delta_t, limit } => {
                write!(f, "delta_t = {delta_t} exceeds tau1/margin = {limit}")
            }
            Violation::NonPositiveWindow { window } => {
                write!(f, "coincidence window must be positive (got {window})")
            }
            Violation::WindowNotSmallerThanDeltaT { window, delta_t } => {
                write!(f, "window {window} is not smaller than delta_t {delta_t}")
            }
            Violation::EfficiencyOutOfRange { name, value } => {
                write!(f, "detector efficiency {name} = {value} is outside [0, 1]")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Non-fatal notes, e.g. a large first-order shift.
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn warn_if_nonperturbative(&mut self, gup: &GupParams, delta_e: f64, delta_e_p: f64) {
        let rel = gup.relative_shift(delta_e, delta_e_p);
        if rel > 0.1 {
            self.warnings.push(format!(
                "beta*dE_p/dE = {rel:.3e} exceeds 0.1; first-order results may be unreliable"
            ));
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks the cascade and interferometer against every ordering and
/// timescale-separation constraint. Violations are collected, not fatal.
pub fn validate_experiment(
    cascade: &CascadeSpec,
    ifc: &InterferometerConfig,
    limits: &ValidationLimits,
) -> Result<ValidationReport> {
    for (v, name) in [
        (cascade.e1, "e1"),
        (cascade.e2, "e2"),
        (cascade.e3, "e3"),
        (cascade.tau1, "tau1"),
        (cascade.tau2, "tau2"),
        (cascade.tau3, "tau3"),
        (ifc.delta_t, "delta_t"),
        (ifc.phi1, "phi1"),
        (ifc.phi2, "phi2"),
        (ifc.eta1, "eta1"),
        (ifc.eta2, "eta2"),
        (ifc.window, "window"),
        (limits.hierarchy_min, "hierarchy_min"),
        (limits.hierarchy_margin, "hierarchy_margin"),
    ] {
        ensure_finite(v, name)?;
    }
    if limits.hierarchy_min <= 0.0 || limits.hierarchy_margin <= 0.0 {
        return Err(Error::InvalidParameter("validation limits must be positive".into()));
    }

    let mut out = Vec::new();
    let CascadeSpec { e1, e2, e3, tau1, tau2, tau3 } = *cascade;

    if !(e1 > e2 && e2 > e3) {
        out.push(Violation::EnergyOrdering { e1, e2, e3 });
    }

    let mut lifetimes_positive = true;
    for (value, name) in [(tau1, "tau1"), (tau2, "tau2"), (tau3, "tau3")] {
        if value <= 0.0 {
            lifetimes_positive = false;
            out.push(Violation::NonPositiveLifetime { name: name.into(), value });
        }
    }
    if !(tau2 < tau1) {
        out.push(Violation::LifetimeOrdering { detail: format!("tau2 ({tau2}) must be < tau1 ({tau1})") });
    }
    if !(tau1 < tau3) {
        out.push(Violation::LifetimeOrdering { detail: format!("tau1 ({tau1}) must be < tau3 ({tau3})") });
    }
    if lifetimes_positive && tau1 / tau2 < limits.hierarchy_min {
        out.push(Violation::LifetimeHierarchy { ratio: tau1 / tau2, required: limits.hierarchy_min });
    }

    let margin = limits.hierarchy_margin;
    if ifc.delta_t < margin * tau2 || ifc.delta_t <= 0.0 {
        out.push(Violation::DeltaTTooShort { delta_t: ifc.delta_t, limit: margin * tau2 });
    }
    if ifc.delta_t > tau1 / margin {
        out.push(Violation::DeltaTTooLong { delta_t: ifc.delta_t, limit: tau1 / margin });
    }
    if ifc.window <= 0.0 {
        out.push(Violation::NonPositiveWindow { window: ifc.window });
    }
    if ifc.window >= ifc.delta_t {
        out.push(Violation::WindowNotSmallerThanDeltaT { window: ifc.window, delta_t: ifc.delta_t });
    }
    for (value, name) in [(ifc.eta1, "eta1"), (ifc.eta2, "eta2")] {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::EfficiencyOutOfRange { name: name.into(), value });
        }
    }

    Ok(ValidationReport { violations: out, warnings: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cascade(tau1: f64, tau2: f64, tau3: f64) -> CascadeSpec {
        CascadeSpec { e1: 2.5, e2: 1.5, e3: 0.5, tau1, tau2, tau3 }
    }

    fn ifc(delta_t: f64, window: f64) -> InterferometerConfig {
        InterferometerConfig { delta_t, phi1: 0.0, phi2: 0.0, eta1: 1.0, eta2: 1.0, window }
    }

    #[test]
    fn default_config_is_valid() {
        let r = validate_experiment(&cascade(100.0, 0.1, 1000.0), &ifc(10.0, 1.0), &Default::default()).unwrap();
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn long_delta_t_is_flagged() {
        let r = validate_experiment(&cascade(100.0, 0.1, 1000.0), &ifc(200.0, 1.0), &Default::default()).unwrap();
        assert_eq!(r.violations, vec![Violation::DeltaTTooLong { delta_t: 200.0, limit: 10.0 }]);
    }

    #[test]
    fn wide_window_is_flagged() {
        let r = validate_experiment(&cascade(100.0, 0.1, 1000.0), &ifc(10.0, 20.0), &Default::default()).unwrap();
        assert_eq!(
            r.violations,
            vec![Violation::WindowNotSmallerThanDeltaT { window: 20.0, delta_t: 10.0 }]
        );
    }

    #[test]
    fn ordering_violations_are_all_reported() {
        let mut c = cascade(0.05, 0.1, 0.01);
        c.e2 = 3.0;
        let r = validate_experiment(&c, &ifc(10.0, 1.0), &Default::default()).unwrap();
        assert!(r.violations.iter().any(|v| matches!(v, Violation::EnergyOrdering { .. })));
        assert_eq!(
            r.violations.iter().filter(|v| matches!(v, Violation::LifetimeOrdering { .. })).count(),
            2
        );
    }

    #[test]
    fn non_finite_is_rejected() {
        let err = validate_experiment(&cascade(f64::NAN, 0.1, 1000.0), &ifc(10.0, 1.0), &Default::default());
        assert!(matches!(err, Err(Error::NonFinite("tau1"))));
    }

    #[test]
    fn mode_coefficients_reject_mismatch_and_zero() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert!(matches!(
            ModeCoefficients::new(vec![one, zero], vec![zero]),
            Err(Error::ModeLengthMismatch { c: 2, c_prime: 1 })
        ));
        assert!(ModeCoefficients::new(vec![zero], vec![one]).is_err());
    }

    #[test]
    fn gup_warning_threshold() {
        let mut r = ValidationReport::default();
        r.warn_if_nonperturbative(&GupParams::new(1e-3).unwrap(), 2.0, 9.0);
        assert!(r.warnings.is_empty());
        r.warn_if_nonperturbative(&GupParams::new(0.1).unwrap(), 2.0, 9.0);
        assert_eq!(r.warnings.len(), 1);
    }

    proptest! {
        #[test]
        fn accepted_configs_satisfy_invariants(
            e in prop::array::uniform3(-5.0f64..5.0),
            tau in prop::array::uniform3(-1.0f64..2000.0),
            delta_t in -1.0f64..300.0,
            window in -1.0f64..30.0,
            eta in prop::array::uniform2(-0.2f64..1.2),
        ) {
            let c = CascadeSpec { e1: e[0], e2: e[1], e3: e[2], tau1: tau[0], tau2: tau[1], tau3: tau[2] };
            let i = InterferometerConfig { delta_t, phi1: 0.3, phi2: -1.0, eta1: eta[0], eta2: eta[1], window };
            let limits = ValidationLimits::default();
            let r1 = validate_experiment(&c, &i, &limits).unwrap();
            let r2 = validate_experiment(&c, &i, &limits).unwrap();
            prop_assert_eq!(&r1, &r2);
            if r1.is_valid() {
                prop_assert!(c.e1 > c.e2 && c.e2 > c.e3);
                prop_assert!(c.tau2 > 0.0 && c.tau2 < c.tau1 && c.tau1 < c.tau3);
                prop_assert!(c.tau1 / c.tau2 >= limits.hierarchy_min);
                prop_assert!(i.delta_t >= limits.hierarchy_margin * c.tau2);
                prop_assert!(i.delta_t <= c.tau1 / limits.hierarchy_margin);
                prop_assert!(i.window > 0.0 && i.window < i.delta_t);
                prop_assert!((0.0..=1.0).contains(&i.eta1) && (0.0..=1.0).contains(&i.eta2));
            }
        }
    }
}
