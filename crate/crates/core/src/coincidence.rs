//! Closed-form coincidence rates for the unbalanced two-interferometer setup.
//!
//! The unperturbed law is R_c = (R0/4)·cos²(Φ/2) with
//! Φ = ΔE·ΔT/ℏ + φ1 + φ2. The first-order correction replaces R0 by
//! R0 + 2β(R′1 + R′2) and adds β·ΔE_p·ΔT/ℏ to Φ, so at fixed prefactor the
//! correction is a pure translation of the fringe pattern.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::model::{CascadeSpec, ModeCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDecomposition {
    /// φ1/2
    pub phi1_prime: f64,
    /// −(φ2 + ΔE·ΔT/ℏ + β·ΔE_p·ΔT/ℏ)/2
    pub phi2_prime: f64,
    /// ΔE·ΔT/ℏ + β·ΔE_p·ΔT/ℏ + φ1 + φ2
    pub total: f64,
}

impl PhaseDecomposition {
    /// Half-angle entering cos², written as Φ1′ − Φ2′.
    pub fn half_angle(&self) -> f64 {
        self.phi1_prime - self.phi2_prime
    }
}

#[allow(clippy::too_many_arguments)]
pub fn total_phase(
    delta_e: f64,
    delta_e_p: f64,
    beta: f64,
    delta_t: f64,
    phi1: f64,
    phi2: f64,
    hbar: f64,
) -> Result<PhaseDecomposition> {
    for (v, name) in [
        (delta_e, "delta_e"),
        (delta_e_p, "delta_e_p"),
        (beta, "beta"),
        (delta_t, "delta_t"),
        (phi1, "phi1"),
        (phi2, "phi2"),
        (hbar, "hbar"),
    ] {
        ensure_finite(v, name)?;
    }
    if hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    if delta_t <= 0.0 {
        return Err(Error::InvalidParameter(format!("delta_t must be positive, got {delta_t}")));
    }
    let dynamic = delta_e * delta_t / hbar + beta * delta_e_p * delta_t / hbar;
    Ok(PhaseDecomposition {
        phi1_prime: phi1 / 2.0,
        phi2_prime: -(phi2 + dynamic) / 2.0,
        total: dynamic + (phi1 + phi2),
    })
}

/// δΦ = β·ΔE_p·ΔT/ℏ.
pub fn fringe_shift(beta: f64, delta_e_p: f64, delta_t: f64, hbar: f64) -> f64 {
    beta * delta_e_p * delta_t / hbar
}

fn cos2_half(total: f64) -> f64 {
    let c = (total / 2.0).cos();
    c * c
}

pub fn rate_baseline(r0: f64, phi1: f64, phi2: f64, delta_e: f64, delta_t: f64, hbar: f64) -> Result<f64> {
    ensure_finite(r0, "r0")?;
    if r0 < 0.0 {
        return Err(Error::InvalidParameter(format!("R0 must be non-negative, got {r0}")));
    }
    let phase = total_phase(delta_e, 0.0, 0.0, delta_t, phi1, phi2, hbar)?;
    Ok(r0 / 4.0 * cos2_half(phase.total))
}

/// The pieces of R0^GUP = R0 + 2β(R′1 + R′2).
///
/// Coefficient products are read as Hermitian inner products of the finite
/// sequences: R0 = (Σ|c_k|²)², R′1 = R′2 = (Σ|c_k|²)·Re Σ conj(c_k)·c′_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRateTerms {
    pub r0: f64,
    pub r1_prime: f64,
    pub r2_prime: f64,
}

impl PairRateTerms {
    pub fn from_modes(modes: &ModeCoefficients) -> Self {
        let norm: f64 = modes.c().iter().map(|z| z.norm_sqr()).sum();
        let overlap: f64 = modes.c().iter().zip(modes.c_prime()).map(|(c, cp)| (c.conj() * cp).re).sum();
        let r_prime = norm * overlap;
        Self { r0: norm * norm, r1_prime: r_prime, r2_prime: r_prime }
    }

    /// Corrected prefactor and whether it had to be clamped at zero.
    pub fn corrected(&self, beta: f64) -> (f64, bool) {
        let value = self.r0 + 2.0 * beta * (self.r1_prime + self.r2_prime);
        if value < 0.0 {
            log::warn!("R0^GUP = {value:.6e} < 0 at beta = {beta:e}; clamped to 0 (first-order regime left)");
            (0.0, true)
        } else {
            (value, false)
        }
    }
}

pub fn r0_gup(modes: &ModeCoefficients, beta: f64) -> Result<f64> {
    ensure_finite(beta, "beta")?;
    Ok(PairRateTerms::from_modes(modes).corrected(beta).0)
}

#[allow(clippy::too_many_arguments)]
pub fn rate_gup(
    modes: &ModeCoefficients,
    beta: f64,
    delta_e: f64,
    delta_e_p: f64,
    delta_t: f64,
    phi1: f64,
    phi2: f64,
    hbar: f64,
) -> Result<f64> {
    let r0 = r0_gup(modes, beta)?;
    let phase = total_phase(delta_e, delta_e_p, beta, delta_t, phi1, phi2, hbar)?;
    Ok(r0 / 4.0 * cos2_half(phase.total))
}

/// Parameter that a spectrum is scanned over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Phi1,
    Phi2,
    DeltaT,
    Beta,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Phi1 => "phi1",
            Axis::Phi2 => "phi2",
            Axis::DeltaT => "delta_t",
            Axis::Beta => "beta",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi1" => Ok(Axis::Phi1),
            "phi2" => Ok(Axis::Phi2),
            "delta_t" => Ok(Axis::DeltaT),
            "beta" => Ok(Axis::Beta),
            other => Err(Error::InvalidParameter(format!("unknown axis `{other}`"))),
        }
    }
}

/// Everything needed to evaluate the corrected coincidence rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FransonModel {
    pub terms: PairRateTerms,
    pub beta: f64,
    pub delta_e: f64,
    pub delta_e_p: f64,
    pub delta_t: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub hbar: f64,
    /// Fringe contrast; 1 for the ideal law, exp(−ΔT·Δω) with damping enabled.
    pub visibility: f64,
}

impl FransonModel {
    pub fn ideal(modes: &ModeCoefficients, beta: f64, delta_e: f64, delta_e_p: f64, delta_t: f64, hbar: f64) -> Self {
        Self {
            terms: PairRateTerms::from_modes(modes),
            beta,
            delta_e,
            delta_e_p,
            delta_t,
            phi1: 0.0,
            phi2: 0.0,
            hbar,
            visibility: 1.0,
        }
    }

    /// Enables the finite-linewidth damping exp(−ΔT·(1/τ1 + 1/τ3)).
    pub fn with_damping(mut self, cascade: &CascadeSpec) -> Self {
        self.visibility = (-self.delta_t * cascade.sum_frequency_width()).exp();
        self
    }

    pub fn with_phases(mut self, phi1: f64, phi2: f64) -> Self {
        self.phi1 = phi1;
        self.phi2 = phi2;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_axis(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::Phi1 => self.phi1 = value,
            Axis::Phi2 => self.phi2 = value,
            Axis::DeltaT => self.delta_t = value,
            Axis::Beta => self.beta = value,
        }
        self
    }

    pub fn r0_gup(&self) -> f64 {
        self.terms.corrected(self.beta).0
    }

    pub fn phase(&self) -> Result<PhaseDecomposition> {
        total_phase(self.delta_e, self.delta_e_p, self.beta, self.delta_t, self.phi1, self.phi2, self.hbar)
    }

    pub fn fringe_shift(&self) -> f64 {
        fringe_shift(self.beta, self.delta_e_p, self.delta_t, self.hbar)
    }

    /// Probability weight of the interfering channel, cos²(Φ/2) or its damped form.
    pub fn fringe_factor(&self, total: f64) -> f64 {
        if self.visibility == 1.0 {
            cos2_half(total)
        } else {
            0.5 * (1.0 + self.visibility * total.cos())
        }
    }

    pub fn rate(&self) -> Result<f64> {
        let phase = self.phase()?;
        Ok(self.r0_gup() / 4.0 * self.fringe_factor(phase.total))
    }

    /// Rate at interferometer settings (φ1, φ2), other parameters fixed.
    /// Unchecked: callers validate the model once via [`FransonModel::rate`].
    pub fn rate_at(&self, phi1: f64, phi2: f64) -> f64 {
        let dynamic = self.delta_e * self.delta_t / self.hbar + self.beta * self.delta_e_p * self.delta_t / self.hbar;
        self.r0_gup() / 4.0 * self.fringe_factor(dynamic + (phi1 + phi2))
    }
}

/// Uniform sampling of `[start, stop)` or, with `endpoint`, `[start, stop]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub samples: usize,
    #[serde(default)]
    pub endpoint: bool,
}

impl SweepRange {
    pub fn new(start: f64, stop: f64, samples: usize, endpoint: bool) -> Result<Self> {
        let r = Self { start, stop, samples, endpoint };
        r.check()?;
        Ok(r)
    }

    pub fn check(&self) -> Result<()> {
        ensure_finite(self.start, "range start")?;
        ensure_finite(self.stop, "range stop")?;
        if self.samples < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 samples, got {}", self.samples)));
        }
        if !(self.stop > self.start) {
            return Err(Error::EmptyRange);
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let intervals = if self.endpoint { self.samples - 1 } else { self.samples };
        let step = (self.stop - self.start) / intervals as f64;
        (0..self.samples).map(|i| self.start + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub value: f64,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub axis: Axis,
    pub points: Vec<SpectrumPoint>,
}

impl Spectrum {
    pub fn new(axis: Axis, points: Vec<SpectrumPoint>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].value > w[0].value)) {
            return Err(Error::InvalidParameter("spectrum axis values must be strictly increasing".into()));
        }
        if points.iter().any(|p| !(p.rate >= 0.0)) {
            return Err(Error::InvalidParameter("spectrum rates must be non-negative".into()));
        }
        Ok(Self { axis, points })
    }

    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rate).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

pub fn scan_spectrum(model: &FransonModel, axis: Axis, range: &SweepRange) -> Result<Spectrum> {
    range.check()?;
    model.rate()?;
    let points = range
        .values()
        .into_par_iter()
        .map(|value| model.with_axis(axis, value).rate().map(|rate| SpectrumPoint { value, rate, std_error: None }))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(axis, points)
}

/// (max − min)/(max + min) of the sampled rates; 0 when everything vanishes.
pub fn visibility(spectrum: &Spectrum) -> f64 {
    let (lo, hi) = spectrum
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.rate), hi.max(p.rate)));
    if spectrum.points.is_empty() || hi + lo == 0.0 {
        return 0.0;
    }
    (hi - lo) / (hi + lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn modes(c: &[f64], cp: &[f64]) -> ModeCoefficients {
        ModeCoefficients::new(
            c.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            cp.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn total_phase_examples() {
        assert_eq!(total_phase(2.0, 9.0, 0.0, 1.0, 0.0, 0.0, 1.0).unwrap().total, 2.0);
        assert!((total_phase(2.0, 9.0, 1e-3, 1.0, 0.0, 0.0, 1.0).unwrap().total - 2.009).abs() < 1e-15);
        assert!((total_phase(0.0, 0.0, 0.0, 1.0, PI / 2.0, PI / 2.0, 1.0).unwrap().total - PI).abs() < 1e-15);
        assert!(total_phase(1.0, 0.0, 0.0, 1.0, f64::NAN, 0.0, 1.0).is_err());
        assert!(total_phase(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn phase_decomposition_is_consistent() {
        let p = total_phase(2.0, 9.0, 1e-3, 1.7, 0.4, -1.1, 1.3).unwrap();
        assert!(((p.total / 2.0).cos().powi(2) - p.half_angle().cos().powi(2)).abs() < 1e-15);
        let p0 = total_phase(2.0, 9.0, 0.0, 1.7, 0.4, -1.1, 1.3).unwrap();
        assert_eq!(p0.phi1_prime, 0.2);
        assert_eq!(p0.phi2_prime, -(-1.1 + 2.0 * 1.7 / 1.3) / 2.0);
    }

    #[test]
    fn baseline_examples() {
        assert_eq!(rate_baseline(1.0, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap(), 0.25);
        assert!(rate_baseline(1.0, PI, 0.0, 0.0, 1.0, 1.0).unwrap().abs() < 1e-32);
        assert!((rate_baseline(1.0, PI / 3.0, PI / 6.0, 0.0, 1.0, 1.0).unwrap() - 0.125).abs() < 1e-16);
        assert!(rate_baseline(-1.0, 0.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn r0_gup_examples() {
        assert_eq!(r0_gup(&modes(&[1.0, 0.0], &[0.0, 0.0]), 0.37).unwrap(), 1.0);
        // R′1 = R′2 = 1·0.5, so 1 + 2·0.1·(0.5 + 0.5)
        assert!((r0_gup(&modes(&[1.0, 0.0], &[0.5, 0.0]), 0.1).unwrap() - 1.2).abs() < 1e-15);
        let m = modes(&[0.3, -1.2, 0.5], &[0.7, 0.1, -2.0]);
        assert_eq!(r0_gup(&m, 0.0).unwrap(), PairRateTerms::from_modes(&m).r0);
    }

    #[test]
    fn r0_gup_clamps_at_zero() {
        let (v, clamped) = PairRateTerms::from_modes(&modes(&[1.0], &[-10.0])).corrected(0.1);
        assert_eq!((v, clamped), (0.0, true));
    }

    #[test]
    fn complex_modes_give_real_prefactor() {
        let m = ModeCoefficients::new(
            vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)],
            vec![Complex64::new(0.0, 2.0), Complex64::new(0.0, 1.0)],
        )
        .unwrap();
        // Σ|c|² = 3, Re Σ conj(c)c′ = 2 + 1 = 3
        let t = PairRateTerms::from_modes(&m);
        assert_eq!((t.r0, t.r1_prime), (9.0, 9.0));
    }

    #[test]
    fn gup_rate_near_quadrature() {
        let m = modes(&[1.0, 0.0], &[0.2, 0.0]);
        // unperturbed phase ΔE·ΔT = π/2
        let r = rate_gup(&m, 1e-3, PI / 2.0, 9.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let expected = (1.0 + 2.0 * 1e-3 * 0.4) / 4.0 * (PI / 4.0 + 0.0045).cos().powi(2);
        assert!((r - expected).abs() < 1e-15);
        assert!((r - 0.12397411519958844).abs() < 1e-15, "{r}");
    }

    #[test]
    fn fringe_shift_examples() {
        assert!((fringe_shift(1e-4, 2.0, 5.0, 1.0) - 1e-3).abs() < 1e-18 * 4.0);
        assert_eq!(fringe_shift(0.0, 123.0, 7.0, 1.0), 0.0);
        assert!((fringe_shift(1e-3, 9.0, 1.0, 1.0) - 9e-3).abs() < 9e-3 * 1e-15);
    }

    #[test]
    fn phi2_spectrum_and_errors() {
        let model = FransonModel::ideal(&ModeCoefficients::single(), 0.0, 0.0, 0.0, 1.0, 1.0);
        let s = scan_spectrum(&model, Axis::Phi2, &SweepRange::new(0.0, TAU, 4, false).unwrap()).unwrap();
        let expected = [0.25, 0.125, 0.0, 0.125];
        for (r, e) in s.rates().iter().zip(expected) {
            assert!((r - e).abs() < 1e-16, "{r} vs {e}");
        }
        assert!(matches!(SweepRange::new(0.0, 0.0, 2, false), Err(Error::EmptyRange)));
    }

    #[test]
    fn fringe_minimum_moves_by_shift() {
        let m = ModeCoefficients::single();
        let (de, dep, dt) = (2.0, 9.0, 1.0);
        let beta = 1e-3;
        let n = 200_000;
        let argmin = |b: f64| {
            let model = FransonModel::ideal(&m, b, de, dep, dt, 1.0);
            let range = SweepRange::new(0.0, TAU, n, false).unwrap();
            let s = scan_spectrum(&model, Axis::Phi1, &range).unwrap();
            s.points.iter().min_by(|a, b| a.rate.total_cmp(&b.rate)).unwrap().value
        };
        let step = TAU / n as f64;
        let moved = argmin(0.0) - argmin(beta);
        assert!((moved - fringe_shift(beta, dep, dt, 1.0)).abs() <= step, "{moved}");
    }

    #[test]
    fn visibility_examples() {
        let model = FransonModel::ideal(&ModeCoefficients::single(), 0.0, 0.0, 0.0, 1.0, 1.0);
        let full = scan_spectrum(&model, Axis::Phi2, &SweepRange::new(0.0, TAU, 4, false).unwrap()).unwrap();
        assert_eq!(visibility(&full), 1.0);
        let flat = Spectrum::new(
            Axis::Beta,
            (0..5).map(|i| SpectrumPoint { value: i as f64, rate: 0.3, std_error: None }).collect(),
        )
        .unwrap();
        assert_eq!(visibility(&flat), 0.0);
        let zero = Spectrum::new(Axis::Beta, vec![SpectrumPoint { value: 0.0, rate: 0.0, std_error: None }]).unwrap();
        assert_eq!(visibility(&zero), 0.0);
        let half = scan_spectrum(&model, Axis::Phi2, &SweepRange::new(0.0, PI / 2.0, 2, true).unwrap()).unwrap();
        assert!((visibility(&half) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn damping_reduces_visibility() {
        let cascade = CascadeSpec { e1: 2.0, e2: 1.0, e3: 0.0, tau1: 100.0, tau2: 0.1, tau3: 1000.0 };
        let model = FransonModel::ideal(&ModeCoefficients::single(), 0.0, 0.0, 0.0, 10.0, 1.0).with_damping(&cascade);
        let v = (-10.0 * (0.01 + 0.001f64)).exp();
        assert_eq!(model.visibility, v);
        let s = scan_spectrum(&model, Axis::Phi2, &SweepRange::new(0.0, TAU, 64, false).unwrap()).unwrap();
        assert!((visibility(&s) - v).abs() < 1e-12);
    }

    #[test]
    fn beta_axis_rates_are_linear_at_fixed_fringe() {
        // With ΔE_p = 0 only the prefactor depends on β, and it does so linearly.
        let m = modes(&[1.0, 0.5], &[0.3, -0.2]);
        let model = FransonModel::ideal(&m, 0.0, 1.3, 0.0, 2.0, 1.0).with_phases(0.4, 0.1);
        let s = scan_spectrum(&model, Axis::Beta, &SweepRange::new(0.0, 1e-2, 11, true).unwrap()).unwrap();
        let r = s.rates();
        let d = r[1] - r[0];
        for w in r.windows(2) {
            assert!(((w[1] - w[0]) - d).abs() < 1e-15);
        }
    }

    #[test]
    fn total_phase_derivative_in_beta() {
        let (dep, dt, hbar) = (9.0, 1.7, 0.8);
        let f = |b: f64| total_phase(2.0, dep, b, dt, 0.3, 0.1, hbar).unwrap().total;
        let (b0, h) = (3e-3, 1e-4);
        let fd = (f(b0 + h) - f(b0 - h)) / (2.0 * h);
        let exact = dep * dt / hbar;
        assert!(((fd - exact) / exact).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn periodic_symmetric_bounded(
            p1 in -20.0f64..20.0, p2 in -20.0f64..20.0, beta in 0.0f64..1e-2,
            de in 0.0f64..5.0, dep in 0.0f64..50.0, dt in 0.1f64..10.0,
        ) {
            let m = modes(&[1.0, 0.3], &[0.5, -0.1]);
            let rate = |a: f64, b: f64| rate_gup(&m, beta, de, dep, dt, a, b, 1.0).unwrap();
            let r = rate(p1, p2);
            prop_assert!((r - rate(p1 + TAU, p2)).abs() < 1e-12);
            prop_assert!((r - rate(p1, p2 + TAU)).abs() < 1e-12);
            prop_assert_eq!(r, rate(p2, p1));
            prop_assert!(r >= 0.0 && r <= r0_gup(&m, beta).unwrap() / 4.0);
            let b = |a: f64, c: f64| rate_baseline(1.0, a, c, de, dt, 1.0).unwrap();
            prop_assert!((b(p1, p2) - b(p1 + TAU, p2)).abs() < 1e-12);
        }

        #[test]
        fn beta_is_a_fringe_translation(
            p1 in -10.0f64..10.0, p2 in -10.0f64..10.0, beta in 0.0f64..1e-2,
            de in 0.0f64..5.0, dep in 0.0f64..50.0, dt in 0.1f64..10.0,
        ) {
            let m = modes(&[1.0, 0.3], &[0.5, -0.1]);
            let shifted = FransonModel::ideal(&m, beta, de, dep, dt, 1.0).rate_at(p1, p2);
            let r0 = r0_gup(&m, beta).unwrap();
            let delta = fringe_shift(beta, dep, dt, 1.0);
            let reference = r0 / 4.0 * cos2_half(de * dt + p1 + delta + p2);
            prop_assert!((shifted - reference).abs() < 1e-12);
        }
    }
}
