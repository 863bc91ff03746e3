// SPDX-License-Identifier: Apache-2.0
//! CODATA 2018 constants in SI units.

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reduced flux quantum hbar / 2e in webers.
pub const REDUCED_FLUX_QUANTUM: f64 = HBAR / (2.0 * ELEMENTARY_CHARGE);

/// Resistance quantum h / 2e^2 in ohms.
pub const RESISTANCE_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);
