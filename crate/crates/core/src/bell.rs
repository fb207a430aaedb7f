//! Two-particle correlations and CHSH statistics built from coincidence rates.
//!
//! The correlation at settings (a, b) combines the four rates obtained by
//! shifting either setting by π:
//!
//! E(a, b) = [R(a,b) + R(a+π,b+π) − R(a+π,b) − R(a,b+π)] / Σ of the same four,
//!
//! which reduces to V·cos(a + b + θ) for the fringe law with visibility V and
//! offset θ = ΔE·ΔT/ℏ + β·ΔE_p·ΔT/ℏ. The CHSH combination is
//! S = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::coincidence::FransonModel;
use crate::error::{Error, Result};

/// Coincidence rate as a function of the two interferometer phases.
pub trait RateFunction {
    fn rate(&self, phi1: f64, phi2: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64> RateFunction for F {
    fn rate(&self, phi1: f64, phi2: f64) -> f64 {
        self(phi1, phi2)
    }
}

impl RateFunction for FransonModel {
    fn rate(&self, phi1: f64, phi2: f64) -> f64 {
        self.rate_at(phi1, phi2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshSettings {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Self { a, a_prime, b, b_prime }
    }

    fn get(&self, i: usize) -> f64 {
        [self.a, self.a_prime, self.b, self.b_prime][i]
    }

    fn set(&mut self, i: usize, v: f64) {
        match i {
            0 => self.a = v,
            1 => self.a_prime = v,
            2 => self.b = v,
            _ => self.b_prime = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub s_value: f64,
    pub settings: ChshSettings,
    /// E(a,b), E(a,b′), E(a′,b), E(a′,b′).
    pub correlations: [f64; 4],
}

pub fn correlation(rate: &impl RateFunction, p: PhasePair) -> Result<f64> {
    let PhasePair { a, b } = p;
    let same = rate.rate(a, b) + rate.rate(a + PI, b + PI);
    let flipped = rate.rate(a + PI, b) + rate.rate(a, b + PI);
    let total = same + flipped;
    if !total.is_finite() {
        return Err(Error::NonFinite("coincidence rate"));
    }
    if total == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((same - flipped) / total)
}

pub fn chsh(rate: &impl RateFunction, settings: ChshSettings) -> Result<ChshResult> {
    let ChshSettings { a, a_prime, b, b_prime } = settings;
    let e = [
        correlation(rate, PhasePair { a, b })?,
        correlation(rate, PhasePair { a, b: b_prime })?,
        correlation(rate, PhasePair { a: a_prime, b })?,
        correlation(rate, PhasePair { a: a_prime, b: b_prime })?,
    ];
    Ok(ChshResult { s_value: combine(e), settings, correlations: e })
}

#[inline]
fn combine(e: [f64; 4]) -> f64 {
    e[0] + e[1] + e[2] - e[3]
}

/// Options for [`max_chsh`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSearch {
    /// Grid points per setting axis over [0, 2π).
    pub resolution: usize,
    /// Coordinate-descent rounds; each halves the search bracket.
    pub refinements: usize,
}

impl Default for ChshSearch {
    fn default() -> Self {
        Self { resolution: 32, refinements: 3 }
    }
}

/// Maximizes S over the four settings: exhaustive grid search followed by
/// coordinate-descent refinement. Among grid points whose S ties the maximum
/// (within 1e-12) the lexicographically smallest (a, a′, b, b′) wins.
pub fn max_chsh(rate: &impl RateFunction, search: ChshSearch) -> Result<ChshResult> {
    let n = search.resolution;
    if n < 8 {
        return Err(Error::InvalidParameter(format!("grid resolution must be at least 8, got {n}")));
    }
    let step = TAU / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();

    let mut table = vec![0.0; n * n];
    for (i, &a) in grid.iter().enumerate() {
        for (j, &b) in grid.iter().enumerate() {
            table[i * n + j] = correlation(rate, PhasePair { a, b })?;
        }
    }
    let e = |i: usize, j: usize| table[i * n + j];
    let s_at = |i: usize, ip: usize, j: usize, jp: usize| combine([e(i, j), e(i, jp), e(ip, j), e(ip, jp)]);

    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for ip in 0..n {
            for j in 0..n {
                for jp in 0..n {
                    best = best.max(s_at(i, ip, j, jp));
                }
            }
        }
    }
    let tie = 1e-12 * best.abs().max(1.0);
    let start = 'outer: {
        for i in 0..n {
            for ip in 0..n {
                for j in 0..n {
                    for jp in 0..n {
                        if s_at(i, ip, j, jp) >= best - tie {
                            break 'outer [i, ip, j, jp];
                        }
                    }
                }
            }
        }
        unreachable!("the maximum is attained on the grid")
    };

    let mut settings = ChshSettings::new(grid[start[0]], grid[start[1]], grid[start[2]], grid[start[3]]);
    let mut current = chsh(rate, settings)?.s_value;
    let mut bracket = step;
    for _ in 0..search.refinements {
        for _sweep in 0..200 {
            let before = current;
            for k in 0..4 {
                let x0 = settings.get(k);
                let objective = |x: f64| {
                    let mut s = settings;
                    s.set(k, x);
                    chsh(rate, s).map(|r| r.s_value).unwrap_or(f64::NEG_INFINITY)
                };
                let (x, fx) = golden_max(objective, x0 - bracket, x0 + bracket);
                if fx > current {
                    settings.set(k, x);
                    current = fx;
                }
            }
            if current - before <= 1e-15 {
                break;
            }
        }
        bracket *= 0.5;
    }
    chsh(rate, settings)
}

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Reduces an angle to [0, period).
pub fn wrap(x: f64, period: f64) -> f64 {
    x.rem_euclid(period)
}

/// Distance between two angles modulo `period`.
pub fn angular_distance(x: f64, y: f64, period: f64) -> f64 {
    let d = wrap(x - y, period);
    d.min(period - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence::FransonModel;
    use crate::model::ModeCoefficients;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn ideal(theta: f64) -> impl Fn(f64, f64) -> f64 {
        move |a: f64, b: f64| (0.5 * (a + b + theta)).cos().powi(2)
    }

    #[test]
    fn correlation_examples() {
        assert!((correlation(&ideal(0.0), PhasePair { a: 0.0, b: 0.0 }).unwrap() - 1.0).abs() < 1e-15);
        assert!(correlation(&ideal(0.0), PhasePair { a: 0.3, b: FRAC_PI_2 - 0.3 }).unwrap().abs() < 1e-15);
        assert!((correlation(&ideal(PI), PhasePair { a: 0.0, b: 0.0 }).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_rates_are_an_error() {
        let dead = |_: f64, _: f64| 0.0;
        assert!(matches!(correlation(&dead, PhasePair { a: 0.0, b: 0.0 }), Err(Error::UndefinedCorrelation)));
    }

    #[test]
    fn standard_settings_reach_tsirelson() {
        let s = chsh(&ideal(0.0), ChshSettings::new(0.0, FRAC_PI_2, -FRAC_PI_4, FRAC_PI_4)).unwrap();
        assert!((s.s_value - 2.0 * SQRT_2).abs() < 1e-14, "{}", s.s_value);
        let theta = 1.234;
        let s = chsh(&ideal(theta), ChshSettings::new(0.0, FRAC_PI_2, -FRAC_PI_4 - theta, FRAC_PI_4 - theta)).unwrap();
        assert!((s.s_value - 2.0 * SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn fixed_settings_lose_violation_under_shift() {
        let settings = ChshSettings::new(0.0, FRAC_PI_2, -FRAC_PI_4, FRAC_PI_4);
        let s = chsh(&ideal(0.1), settings).unwrap().s_value;
        // S(δ) = Σ ± cos(x_i + δ) at the standard settings
        let direct = (-FRAC_PI_4 + 0.1).cos() + (FRAC_PI_4 + 0.1).cos() + (FRAC_PI_4 + 0.1).cos()
            - (3.0 * FRAC_PI_4 + 0.1).cos();
        assert!((s - direct).abs() < 1e-14);
        assert!(s < 2.0 * SQRT_2 - 1e-3);
    }

    #[test]
    fn max_chsh_finds_tsirelson() {
        for theta in [0.0, 0.37, 2.9] {
            let r = max_chsh(&ideal(theta), ChshSearch::default()).unwrap();
            assert!((r.s_value - 2.0 * SQRT_2).abs() < 1e-9, "theta {theta}: {}", r.s_value);
        }
    }

    #[test]
    fn max_chsh_is_deterministic_and_checks_resolution() {
        let a = max_chsh(&ideal(0.2), ChshSearch { resolution: 16, refinements: 3 }).unwrap();
        let b = max_chsh(&ideal(0.2), ChshSearch { resolution: 16, refinements: 3 }).unwrap();
        assert_eq!(a, b);
        assert!(max_chsh(&ideal(0.2), ChshSearch { resolution: 7, refinements: 1 }).is_err());
    }

    #[test]
    fn damped_maximum_scales_with_visibility() {
        let v = 0.8;
        let damped = move |a: f64, b: f64| 0.5 * (1.0 + v * (a + b).cos());
        let r = max_chsh(&damped, ChshSearch::default()).unwrap();
        assert!((r.s_value - 2.0 * SQRT_2 * v).abs() < 1e-9);
    }

    #[test]
    fn model_rate_function_matches_closure() {
        let model = FransonModel::ideal(&ModeCoefficients::single(), 1e-3, 2.0, 9.0, 1.0, 1.0);
        let theta = 2.0 + 9e-3;
        for (a, b) in [(0.1, 0.2), (1.0, -3.0)] {
            let e1 = correlation(&model, PhasePair { a, b }).unwrap();
            assert!((e1 - (a + b + theta).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_oracle_bounds_random_settings() {
        let f = ideal(0.0);
        let n = 24;
        let g = |i: usize| TAU * i as f64 / n as f64;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        best = best.max(chsh(&f, ChshSettings::new(g(i), g(j), g(k), g(l))).unwrap().s_value);
                    }
                }
            }
        }
        assert!(best <= 2.0 * SQRT_2 + 1e-12);
        assert!(best > 2.8);
    }

    proptest! {
        #[test]
        fn correlations_and_s_are_bounded(
            s in prop::array::uniform4(-10.0f64..10.0),
            theta in -4.0f64..4.0,
            w in prop::array::uniform3(0.0f64..1.0),
        ) {
            let r = chsh(&ideal(theta), ChshSettings::new(s[0], s[1], s[2], s[3])).unwrap();
            prop_assert!(r.s_value.abs() <= 2.0 * SQRT_2 + 1e-12);
            // an arbitrary non-negative periodic rate still yields |E| ≤ 1, |S| ≤ 4
            let odd = move |a: f64, b: f64| w[0] + w[1] * (a.sin() * (2.0 * b).cos()).powi(2) + w[2] * (a - b).cos().abs();
            if let Ok(r) = chsh(&odd, ChshSettings::new(s[0], s[1], s[2], s[3])) {
                prop_assert!(r.correlations.iter().all(|e| e.abs() <= 1.0 + 1e-15));
                prop_assert!(r.s_value.abs() <= 4.0 + 1e-12);
            }
        }
    }
}
