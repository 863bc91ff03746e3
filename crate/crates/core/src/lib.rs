// SPDX-License-Identifier: Apache-2.0
//! Numerical laboratory for single-qubit weak measurement and related models.
//!
//! Modules:
//! - [`qubit`]: states, Pauli-axis operators, rotations, projective measurement
//! - [`weak`]: Gaussian weak measurement, Bayesian updates, readout binning
//! - [`entropic`]: uncertainty quantifiers, bounds, weak values, EUR simulation
//! - [`arrow`]: trajectory probabilities, Q statistic, feedback, fluctuation theorems
//! - [`cqed`]: Jaynes-Cummings, transmon and LC spectra
//! - [`pulse`]: AWG pulse and sequence compilation
//! - [`junction`]: Josephson junction fabrication models

pub mod arrow;
pub mod constants;
pub mod cqed;
pub mod entropic;
pub mod error;
pub mod junction;
pub mod pulse;
pub mod qubit;
pub mod rng;
pub mod stats;
pub mod weak;

pub use error::{Error, Result};
