// SPDX-License-Identifier: Apache-2.0
//! Truncated Jaynes-Cummings spectra, dispersive parameters, transmon and LC modes.
//!
//! Frequencies in [`JcParams`] are angular (rad/s, or any consistent unit);
//! the Hamiltonian is written with hbar = 1. Basis index is 2n + q with
//! q = 0 for |g> and q = 1 for |e>, and sz|e> = +|e>.

use crate::constants::HBAR;
use crate::error::{require, Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MAX_PHOTONS: usize = 50;
pub const TRANSMON_LIMIT: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub omega_c: f64,
    pub omega_q: f64,
    pub g: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_max() -> usize {
    5
}

impl JcParams {
    pub fn new(omega_c: f64, omega_q: f64, g: f64, n_max: usize) -> Result<Self> {
        let p = Self {
            omega_c,
            omega_q,
            g,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.omega_c.is_finite() && self.omega_q.is_finite(), || {
            "frequencies must be finite".into()
        })?;
        require(self.g >= 0.0 && self.g.is_finite(), || {
            "g must be non-negative".into()
        })?;
        require((2..=MAX_PHOTONS).contains(&self.n_max), || {
            format!("n_max must be in 2..={MAX_PHOTONS}")
        })?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Qubit-cavity detuning omega_q - omega_c.
    pub fn delta(&self) -> f64 {
        self.omega_q - self.omega_c
    }
}

fn idx(n: usize, excited: bool) -> usize {
    2 * n + usize::from(excited)
}

fn bare_diagonal(p: &JcParams) -> DMatrix<f64> {
    let d = p.dim();
    let mut h = DMatrix::zeros(d, d);
    for n in 0..=p.n_max {
        for e in [false, true] {
            let sz = if e { 1.0 } else { -1.0 };
            h[(idx(n, e), idx(n, e))] = p.omega_c * (n as f64 + 0.5) + 0.5 * p.omega_q * sz;
        }
    }
    h
}

/// omega_c (a^dag a + 1/2) + (omega_q/2) sz + g (a^dag s- + a s+).
pub fn jc_hamiltonian(p: &JcParams) -> Result<DMatrix<f64>> {
    p.validate()?;
    let mut h = bare_diagonal(p);
    for n in 0..p.n_max {
        let c = p.g * ((n + 1) as f64).sqrt();
        h[(idx(n + 1, false), idx(n, true))] = c;
        h[(idx(n, true), idx(n + 1, false))] = c;
    }
    Ok(h)
}

/// Rabi Hamiltonian with the counter-rotating terms g (a^dag s+ + a s-).
pub fn jc_hamiltonian_non_rwa(p: &JcParams) -> Result<DMatrix<f64>> {
    let mut h = jc_hamiltonian(p)?;
    for n in 0..p.n_max {
        let c = p.g * ((n + 1) as f64).sqrt();
        h[(idx(n + 1, true), idx(n, false))] = c;
        h[(idx(n, false), idx(n + 1, true))] = c;
    }
    Ok(h)
}

/// Leading-order dispersive Hamiltonian
/// omega_c (a^dag a + 1/2) + chi/2 + ((omega_q + chi)/2) sz + chi a^dag a sz,
/// with the constant chosen to match the Jaynes-Cummings zero of energy.
pub fn dispersive_hamiltonian(p: &JcParams) -> Result<DMatrix<f64>> {
    p.validate()?;
    let (chi, _) = dispersive_params(p.g, p.delta())?;
    let d = p.dim();
    let mut h = DMatrix::zeros(d, d);
    for n in 0..=p.n_max {
        for e in [false, true] {
            let sz = if e { 1.0 } else { -1.0 };
            h[(idx(n, e), idx(n, e))] = p.omega_c * (n as f64 + 0.5)
                + 0.5 * chi
                + 0.5 * (p.omega_q + chi) * sz
                + chi * n as f64 * sz;
        }
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JcLevel {
    pub energy: f64,
    /// Total excitation number n + (q == e).
    pub excitations: usize,
    /// Weight of the |N - 1, e> component within the block.
    pub qubit_weight: f64,
}

/// Eigenvalues by excitation block: |0,g>, the 2x2 blocks {|N,g>, |N-1,e>}
/// for 1 <= N <= n_max, and the truncated singleton |n_max, e>. Sorted by energy.
pub fn jc_spectrum(p: &JcParams) -> Result<Vec<JcLevel>> {
    p.validate()?;
    let bare =
        |n: usize, e: bool| p.omega_c * (n as f64 + 0.5) + if e { 0.5 } else { -0.5 } * p.omega_q;
    let mut levels = vec![JcLevel {
        energy: bare(0, false),
        excitations: 0,
        qubit_weight: 0.0,
    }];
    for n in 1..=p.n_max {
        let (a, b) = (bare(n, false), bare(n - 1, true));
        let c = p.g * (n as f64).sqrt();
        let mean = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let r = half.hypot(c);
        for sign in [-1.0, 1.0] {
            let energy = mean + sign * r;
            // Eigenvector (c, energy - a) in the (|N,g>, |N-1,e>) basis.
            let (vg, ve) = match c == 0.0 {
                true if (energy - b).abs() < (energy - a).abs() => (0.0, 1.0),
                true => (1.0, 0.0),
                false => (c, energy - a),
            };
            let qubit_weight = ve * ve / (vg * vg + ve * ve);
            levels.push(JcLevel {
                energy,
                excitations: n,
                qubit_weight,
            });
        }
    }
    levels.push(JcLevel {
        energy: bare(p.n_max, true),
        excitations: p.n_max + 1,
        qubit_weight: 1.0,
    });
    levels.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    Ok(levels)
}

/// Sorted eigenvalues of a dense symmetric matrix.
pub fn dense_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Splitting of the one-excitation doublet.
pub fn vacuum_rabi_splitting(p: &JcParams) -> Result<f64> {
    let one: Vec<f64> = jc_spectrum(p)?
        .into_iter()
        .filter(|l| l.excitations == 1)
        .map(|l| l.energy)
        .collect();
    Ok(one[1] - one[0])
}

/// Dressed qubit transition minus the bare one: E(qubit-like, N = 1) - E(0, g) - omega_q.
pub fn qubit_shift(p: &JcParams) -> Result<f64> {
    let levels = jc_spectrum(p)?;
    let ground = levels
        .iter()
        .find(|l| l.excitations == 0)
        .map(|l| l.energy)
        .unwrap_or(f64::NAN);
    let qubit_like = levels
        .iter()
        .filter(|l| l.excitations == 1)
        .max_by(|a, b| a.qubit_weight.total_cmp(&b.qubit_weight))
        .ok_or_else(|| Error::Degenerate("no one-excitation levels".into()))?;
    Ok(qubit_like.energy - ground - p.omega_q)
}

/// (chi, n_crit) = (g^2 / Delta, Delta^2 / (4 g^2)).
pub fn dispersive_params(g: f64, delta: f64) -> Result<(f64, f64)> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Domain(
            "dispersive limit needs a nonzero detuning".into(),
        ));
    }
    require(g > 0.0, || "g must be positive".into())?;
    Ok((g * g / delta, (delta / (2.0 * g)).powi(2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JcSweepRow {
    pub delta: f64,
    pub level_index: usize,
    pub energy: f64,
}

/// Spectrum at omega_q = omega_c + delta for every delta, in input order.
pub fn jc_sweep(base: &JcParams, deltas: &[f64]) -> Result<Vec<JcSweepRow>> {
    let per: Vec<Vec<JcSweepRow>> = deltas
        .par_iter()
        .map(|&d| {
            let p = JcParams {
                omega_q: base.omega_c + d,
                ..*base
            };
            Ok(jc_spectrum(&p)?
                .into_iter()
                .enumerate()
                .map(|(k, l)| JcSweepRow {
                    delta: d,
                    level_index: k,
                    energy: l.energy,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransmonSpectrum {
    pub f01: f64,
    pub f12: f64,
    pub alpha: f64,
    pub warning: Option<String>,
}

/// Quartic-expansion transmon levels: f01 = sqrt(8 E_J E_C) - E_C, alpha = -E_C.
pub fn transmon_spectrum(e_j: f64, e_c: f64) -> Result<TransmonSpectrum> {
    require(
        e_j > 0.0 && e_c > 0.0 && e_j.is_finite() && e_c.is_finite(),
        || "E_J and E_C must be positive".into(),
    )?;
    let f01 = (8.0 * e_j * e_c).sqrt() - e_c;
    let alpha = -e_c;
    let ratio = e_j / e_c;
    let warning = (ratio < TRANSMON_LIMIT).then(|| {
        format!("E_J/E_C = {ratio:.3} is outside the transmon limit (< {TRANSMON_LIMIT})")
    });
    Ok(TransmonSpectrum {
        f01,
        f12: f01 + alpha,
        alpha,
        warning,
    })
}

/// (E_J, E_C) from measured f01 and f12.
pub fn transmon_from_spectrum(f01: f64, f12: f64) -> Result<(f64, f64)> {
    let e_c = f01 - f12;
    require(e_c > 0.0, || "f12 must lie below f01".into())?;
    require(f01 + e_c > 0.0, || {
        "f01 too small for the quartic model".into()
    })?;
    Ok(((f01 + e_c).powi(2) / (8.0 * e_c), e_c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LcMode {
    pub omega: f64,
    pub impedance: f64,
    pub phi_zpf: f64,
    pub q_zpf: f64,
}

pub fn lc_mode(l: f64, c: f64) -> Result<LcMode> {
    require(l > 0.0 && c > 0.0 && l.is_finite() && c.is_finite(), || {
        "L and C must be positive".into()
    })?;
    let z = (l / c).sqrt();
    Ok(LcMode {
        omega: 1.0 / (l * c).sqrt(),
        impedance: z,
        phi_zpf: (HBAR * z / 2.0).sqrt(),
        q_zpf: (HBAR / (2.0 * z)).sqrt(),
    })
}
