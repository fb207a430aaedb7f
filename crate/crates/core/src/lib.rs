//! Simulation of Franson-type two-photon interference with first-order
//! minimal-length (quadratic GUP) corrections.
//!
//! - [`model`]: shared domain types and experiment validation
//! - [`perturbation`]: level energies and their first-order corrections
//! - [`coincidence`]: closed-form coincidence rates, spectra, visibility
//! - [`montecarlo`]: event-level simulation converging to the closed form
//! - [`bell`]: correlations and CHSH statistics from coincidence rates
//! - [`io`]: configuration files, result envelopes and CLI commands

// `!(a < b)` is used on purpose so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod coincidence;
pub mod error;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod perturbation;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex;
