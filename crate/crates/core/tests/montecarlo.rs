mod common;

use std::f64::consts::{PI, TAU};

use franson_core::coincidence::{Axis, SweepRange};
use franson_core::montecarlo::{accidental_fraction, mc_spectrum};
use franson_core::rng::SimRng;

use common::*;

#[test]
fn converges_for_random_configurations() {
    let mut rng = SimRng::new(2024, 0);
    let n = 100_000u64;
    let mut within = 0;
    for i in 0..100 {
        let beta = 1e-2 * rng.uniform();
        let ifc = franson_core::model::InterferometerConfig {
            phi1: TAU * rng.uniform(),
            phi2: TAU * rng.uniform(),
            ..interferometer()
        };
        let sim = simulator(beta, 9.0, ifc);
        let expected = tail_oracle(&sim).coincident;
        let rec = sim.run(n, 1000 + i).unwrap();
        let se = binomial_se(expected, n as f64).max(rec.std_error);
        if (rec.rate_estimate - expected).abs() <= 4.0 * se {
            within += 1;
        }
    }
    assert!(within >= 99, "{within}/100 within 4 standard errors");
}

#[test]
fn eight_point_spectrum_matches_closed_form() {
    let sim = simulator(1e-3, 9.0, interferometer());
    let values = SweepRange::new(0.0, TAU, 8, false).unwrap().values();
    let (spec, _) = mc_spectrum(&sim, Axis::Phi2, &values, 100_000, 5).unwrap();
    for p in &spec.points {
        let expected = tail_oracle(&sim.with_axis(Axis::Phi2, p.value)).coincident;
        let se = binomial_se(expected, 1e5).max(p.std_error.unwrap());
        assert!((p.rate - expected).abs() <= 4.0 * se, "{p:?} vs {expected}");
    }
}

#[test]
fn fit_recovers_fringe_shift() {
    let (beta, dep) = (5e-3, 9.0);
    let sim = simulator(beta, dep, interferometer());
    let shift = sim.model.fringe_shift();
    let values = SweepRange::new(0.0, TAU, 16, false).unwrap().values();
    let (spec, _) = mc_spectrum(&sim, Axis::Phi2, &values, 200_000, 11).unwrap();
    let fit = fit_fringe(&spec.values(), &spec.rates());
    assert!((fit.delta - shift).abs() <= 3.0 * fit.delta_err, "{fit:?} vs {shift}");
    assert!(fit.delta_err < 0.02);
}

#[test]
fn fit_helper_is_exact_on_noiseless_data() {
    let xs: Vec<f64> = (0..12).map(|i| i as f64 * TAU / 12.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.3 * ((x + 0.4) / 2.0).cos().powi(2)).collect();
    let fit = fit_fringe(&xs, &ys);
    assert!((fit.delta - 0.4).abs() < 1e-12);
    assert!((fit.amplitude - 0.15).abs() < 1e-12);
}

#[test]
fn accidental_fraction_grows_with_window() {
    let mut last = 0.0;
    for w in [0.05, 0.5, 5.0, 9.8, 10.2, 11.0] {
        let ifc = franson_core::model::InterferometerConfig { window: w, phi2: PI / 2.0, ..interferometer() };
        let sim = simulator(0.0, 0.0, ifc);
        let rec = sim.run(200_000, 8).unwrap();
        let f = accidental_fraction(&rec);
        let oracle = tail_oracle(&sim);
        let se = binomial_se(oracle.fraction(), rec.n_coincident.max(1) as f64);
        assert!((f - oracle.fraction()).abs() <= 4.0 * se + 1e-12, "W={w}: {f} vs {}", oracle.fraction());
        assert!(f + 4.0 * se >= last, "W={w}: {f} < {last}");
        last = f;
    }
}

#[test]
fn same_seed_counts_are_monotone_in_window() {
    let mut prev = (0, 0);
    for w in [0.1, 1.0, 9.9, 10.0, 10.5, 20.0] {
        let ifc = franson_core::model::InterferometerConfig { window: w, ..interferometer() };
        let rec = simulator(0.0, 0.0, ifc).run(50_000, 77).unwrap();
        assert!(rec.n_coincident >= prev.0 && rec.n_accidental >= prev.1);
        prev = (rec.n_coincident, rec.n_accidental);
    }
}
