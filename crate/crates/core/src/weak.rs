// SPDX-License-Identifier: Apache-2.0
//! Gaussian weak measurement of a qubit observable.
//!
//! Convention: the record `j` for the +1 (-1) eigenstate is distributed as
//! N(+1, 1/s) (N(-1, 1/s)), so the Bloch component along the axis updates as
//! `tanh(s j + atanh z0)`. The Kraus operator is
//! `K_j = (s/2pi)^(1/4) exp(-s (j - A)^2 / 4)`, written here in the
//! equivalent spectral form `(s/2pi)^(1/4) [e^{-s(j-1)^2/4} P+ + e^{-s(j+1)^2/4} P-]`.

use crate::error::{require, Error, Result};
use crate::qubit::{re, Bloch, MeasurementAxis, Op2, Outcome, QubitState};
use crate::rng::StreamFactory;
use crate::stats::{log_add_exp, normal_interval, normal_ln_pdf};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Dimensionless strength s = dt/tau with optional quantum efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementStrength {
    s: f64,
    eta: f64,
}

impl MeasurementStrength {
    pub fn new(s: f64) -> Result<Self> {
        Self::with_efficiency(s, 1.0)
    }

    pub fn with_efficiency(s: f64, eta: f64) -> Result<Self> {
        require(s > 0.0 && s.is_finite(), || {
            format!("strength s must be positive, got {s}")
        })?;
        require(eta > 0.0 && eta <= 1.0, || {
            format!("efficiency must be in (0, 1], got {eta}")
        })?;
        Ok(Self { s, eta })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Strength seen by the record, s * eta.
    pub fn record_strength(&self) -> f64 {
        self.s * self.eta
    }

    /// Variance of each record Gaussian, 1/(s eta).
    pub fn record_variance(&self) -> f64 {
        1.0 / (self.s * self.eta)
    }

    /// Extra coherence factor from the unrecorded part of the backaction.
    pub fn hidden_dephasing(&self) -> f64 {
        (-self.s * (1.0 - self.eta) / 2.0).exp()
    }
}

/// Kraus operator for a single record value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausOperator {
    pub j: f64,
    pub strength: MeasurementStrength,
    pub axis: MeasurementAxis,
    pub matrix: Op2,
}

/// Amplitudes (a+, a-) multiplying the axis projectors in K_j.
pub fn kraus_amplitudes(j: f64, s: f64) -> (f64, f64) {
    let norm = (s / (2.0 * PI)).powf(0.25);
    (
        norm * (-s * (j - 1.0).powi(2) / 4.0).exp(),
        norm * (-s * (j + 1.0).powi(2) / 4.0).exp(),
    )
}

/// Builds K_j along `axis`. Efficiency does not enter; see [`weak_update`].
pub fn kraus_operator(
    j: f64,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
) -> Result<KrausOperator> {
    if !j.is_finite() {
        return Err(Error::InvalidParameter(
            "record value j must be finite".into(),
        ));
    }
    let (ap, am) = kraus_amplitudes(j, strength.s());
    let matrix = axis.projector(Outcome::Plus).matrix * re(ap)
        + axis.projector(Outcome::Minus).matrix * re(am);
    Ok(KrausOperator {
        j,
        strength,
        axis,
        matrix,
    })
}

/// K rho K^dag normalised.
pub fn kraus_update(state: &QubitState, k: &KrausOperator) -> Result<QubitState> {
    let m = k.matrix * state.matrix() * k.matrix.adjoint();
    QubitState::from_unnormalized(m)
}

/// Post-measurement state for record `j`, including the hidden dephasing
/// when the efficiency is below one.
pub fn weak_update(
    state: &QubitState,
    j: f64,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
) -> Result<QubitState> {
    if !j.is_finite() {
        return Err(Error::InvalidParameter(
            "record value j must be finite".into(),
        ));
    }
    let sr = strength.record_strength();
    // Relative amplitudes avoid underflow for large |j|.
    let lp = -sr * (j - 1.0).powi(2) / 4.0;
    let lm = -sr * (j + 1.0).powi(2) / 4.0;
    let top = lp.max(lm);
    let (wp, wm) = ((lp - top).exp(), (lm - top).exp());
    let pp = axis.projector(Outcome::Plus).matrix;
    let pm = axis.projector(Outcome::Minus).matrix;
    let rho = state.matrix();
    let cross = wp * wm * strength.hidden_dephasing();
    let m = pp * rho * pp * re(wp * wp)
        + pm * rho * pm * re(wm * wm)
        + (pp * rho * pm + pm * rho * pp) * re(cross);
    QubitState::from_unnormalized(m)
}

/// Probability that j lands in [a, b) and the state averaged over those records.
pub fn bin_update(
    state: &QubitState,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
    a: f64,
    b: f64,
) -> Result<(f64, Option<QubitState>)> {
    let var = strength.record_variance();
    let cpp = normal_interval(a, b, 1.0, var);
    let cmm = normal_interval(a, b, -1.0, var);
    let cx = (-strength.s() / 2.0).exp() * normal_interval(a, b, 0.0, var);
    let pp = axis.projector(Outcome::Plus).matrix;
    let pm = axis.projector(Outcome::Minus).matrix;
    let rho = state.matrix();
    let m = pp * rho * pp * re(cpp)
        + pm * rho * pm * re(cmm)
        + (pp * rho * pm + pm * rho * pp) * re(cx);
    let weight = m.trace().re;
    if weight <= 0.0 {
        return Ok((0.0, None));
    }
    Ok((weight, Some(QubitState::from_unnormalized(m)?)))
}

/// ln p(j | state) for the two-Gaussian record mixture.
pub fn ln_outcome_density(
    state: &QubitState,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
    j: f64,
) -> f64 {
    let r = state.bloch().dot(&axis.direction()).clamp(-1.0, 1.0);
    ln_outcome_density_r(r, strength.record_variance(), j)
}

/// ln of `((1+r)/2) N(j; 1, var) + ((1-r)/2) N(j; -1, var)`.
pub fn ln_outcome_density_r(r: f64, variance: f64, j: f64) -> f64 {
    let wp = 0.5 * (1.0 + r);
    let wm = 0.5 * (1.0 - r);
    let a = if wp > 0.0 {
        wp.ln() + normal_ln_pdf(j, 1.0, variance)
    } else {
        f64::NEG_INFINITY
    };
    let b = if wm > 0.0 {
        wm.ln() + normal_ln_pdf(j, -1.0, variance)
    } else {
        f64::NEG_INFINITY
    };
    log_add_exp(a, b)
}

/// p(j | state).
pub fn outcome_density(
    state: &QubitState,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
    j: f64,
) -> f64 {
    ln_outcome_density(state, strength, axis, j).exp()
}

/// Record value and post-measurement state.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakOutcome {
    pub j: f64,
    pub post: QubitState,
}

/// Draws a record from the mixture and applies the backaction.
pub fn weak_measure<R: Rng + ?Sized>(
    state: &QubitState,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
    rng: &mut R,
) -> Result<WeakOutcome> {
    let r = state.bloch().dot(&axis.direction()).clamp(-1.0, 1.0);
    let u: f64 = rng.random();
    let mean = if u < 0.5 * (1.0 + r) { 1.0 } else { -1.0 };
    let z: f64 = StandardNormal.sample(rng);
    let j = mean + z * strength.record_variance().sqrt();
    let post = weak_update(state, j, strength, axis)?;
    Ok(WeakOutcome { j, post })
}

/// Probability that the record falls in [a, b].
pub fn outcome_probability(
    state: &QubitState,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
    a: f64,
    b: f64,
) -> Result<f64> {
    require(a <= b, || format!("interval [{a}, {b}] is reversed"))?;
    let r = state.bloch().dot(&axis.direction()).clamp(-1.0, 1.0);
    let var = strength.record_variance();
    Ok(0.5 * (1.0 + r) * normal_interval(a, b, 1.0, var)
        + 0.5 * (1.0 - r) * normal_interval(a, b, -1.0, var))
}

/// Bayesian Bloch update for a z-axis record: z = tanh(s j + atanh z0),
/// x = sqrt(1 - z^2) exp(-gamma dt). Returns (z, x).
pub fn bayesian_update(z0: f64, j: f64, s: f64, gamma: f64, dt: f64) -> Result<(f64, f64)> {
    require(z0.abs() <= 1.0, || format!("|z0| must be <= 1, got {z0}"))?;
    require(j.is_finite(), || "record value j must be finite".into())?;
    require(s >= 0.0, || format!("strength must be >= 0, got {s}"))?;
    require(gamma >= 0.0 && dt >= 0.0, || {
        "gamma and dt must be >= 0".into()
    })?;
    if z0.abs() == 1.0 {
        return Ok((z0, 0.0));
    }
    let z = (j * s + z0.atanh()).tanh();
    let x = (1.0 - z * z).max(0.0).sqrt() * (-gamma * dt).exp();
    Ok((z, x))
}

/// Measurement calibration quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub chi: f64,
    pub kappa: f64,
    pub nbar: f64,
    pub eta: f64,
    pub dt: f64,
    /// Ensemble dephasing rate 8 chi^2 nbar / kappa.
    pub gamma_m: f64,
    /// AC Stark shift 2 chi nbar.
    pub stark: f64,
    /// Measurement rate 1/tau = 8 chi^2 nbar eta / kappa.
    pub rate: f64,
    /// Separation parameter 8 dt eta / tau.
    pub separation: f64,
    /// Dimensionless strength dt / tau.
    pub strength: f64,
}

/// Computes the calibration record; rates in rad/s, `dt` in seconds.
pub fn calibration(
    chi: f64,
    kappa: f64,
    nbar: f64,
    eta: f64,
    dt: f64,
) -> Result<CalibrationRecord> {
    if kappa == 0.0 {
        return Err(Error::InvalidParameter("kappa must be non-zero".into()));
    }
    require(kappa > 0.0, || {
        format!("kappa must be positive, got {kappa}")
    })?;
    require(nbar >= 0.0, || format!("nbar must be >= 0, got {nbar}"))?;
    require(eta > 0.0 && eta <= 1.0, || {
        format!("eta must be in (0, 1], got {eta}")
    })?;
    require(dt >= 0.0, || format!("dt must be >= 0, got {dt}"))?;
    let gamma_m = 8.0 * chi * chi * nbar / kappa;
    let rate = gamma_m * eta;
    Ok(CalibrationRecord {
        chi,
        kappa,
        nbar,
        eta,
        dt,
        gamma_m,
        stark: 2.0 * chi * nbar,
        rate,
        separation: 8.0 * dt * eta * rate,
        strength: dt * rate,
    })
}

/// Inverts 1/tau = 8 chi^2 nbar eta / kappa for the mean photon number.
pub fn nbar_from_rate(rate: f64, chi: f64, kappa: f64, eta: f64) -> Result<f64> {
    require(chi != 0.0, || "chi must be non-zero".into())?;
    require(kappa > 0.0 && eta > 0.0, || {
        "kappa and eta must be positive".into()
    })?;
    Ok(rate * kappa / (8.0 * chi * chi * eta))
}

/// Discretisation of the record axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub v_gnd: f64,
    pub v_ex: f64,
    pub bins: usize,
    pub j_min: f64,
    pub j_max: f64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self {
            v_gnd: 1.0,
            v_ex: -1.0,
            bins: 52,
            j_min: -8.0,
            j_max: 8.0,
        }
    }
}

impl ReadoutModel {
    pub fn new(bins: usize, j_min: f64, j_max: f64) -> Result<Self> {
        let m = Self {
            bins,
            j_min,
            j_max,
            ..Self::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.bins >= 2, || {
            format!("need at least 2 bins, got {}", self.bins)
        })?;
        require(self.j_min < self.j_max, || {
            "bin range must satisfy j_min < j_max".into()
        })?;
        require(self.v_gnd > self.v_ex, || "v_gnd must exceed v_ex".into())?;
        Ok(())
    }

    pub fn width(&self) -> f64 {
        (self.j_max - self.j_min) / self.bins as f64
    }

    /// Bin index with out-of-range values clamped to the edge bins.
    pub fn bin_index(&self, j: f64) -> usize {
        let k = ((j - self.j_min) / self.width()).floor();
        if k < 0.0 || k.is_nan() {
            0
        } else {
            (k as usize).min(self.bins - 1)
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.bins)
            .map(|k| self.j_min + (k as f64 + 0.5) * w)
            .collect()
    }

    /// Integration limits of bin `k`; edge bins extend to infinity.
    pub fn limits(&self, k: usize) -> (f64, f64) {
        let w = self.width();
        let a = if k == 0 {
            f64::NEG_INFINITY
        } else {
            self.j_min + k as f64 * w
        };
        let b = if k + 1 == self.bins {
            f64::INFINITY
        } else {
            self.j_min + (k + 1) as f64 * w
        };
        (a, b)
    }

    /// Exact bin probabilities for a weak measurement of `state`.
    pub fn bin_probabilities(
        &self,
        state: &QubitState,
        strength: MeasurementStrength,
        axis: MeasurementAxis,
    ) -> Vec<f64> {
        (0..self.bins)
            .map(|k| {
                let (a, b) = self.limits(k);
                outcome_probability(state, strength, axis, a, b).unwrap_or(0.0)
            })
            .collect()
    }
}

/// Normalised histogram of records.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedRecord {
    pub model: ReadoutModel,
    pub counts: Vec<u64>,
    pub probabilities: Vec<f64>,
}

impl BinnedRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// log2 of the number of occupied bins.
    pub fn baseline_bits(&self) -> f64 {
        (self.occupied() as f64).log2()
    }

    pub fn entropy_bits(&self) -> f64 {
        crate::entropic::shannon_bits(&self.probabilities)
    }
}

pub fn bin_record(samples: &[f64], model: &ReadoutModel) -> Result<BinnedRecord> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples to bin".into()));
    }
    model.validate()?;
    let mut counts = vec![0u64; model.bins];
    for &j in samples {
        counts[model.bin_index(j)] += 1;
    }
    let n = samples.len() as f64;
    let probabilities = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(BinnedRecord {
        model: *model,
        counts,
        probabilities,
    })
}

/// Amplitude damping towards |0> with probability 1 - exp(-t/t1), then pure
/// dephasing exp(-gamma_phi t) on the coherences. `t1 = inf` disables decay.
pub fn decay_channel(state: &QubitState, t: f64, t1: f64, gamma_phi: f64) -> Result<QubitState> {
    require(t1 > 0.0, || format!("t1 must be positive, got {t1}"))?;
    require(t >= 0.0 && gamma_phi >= 0.0, || {
        "t and gamma_phi must be >= 0".into()
    })?;
    let p = if t1.is_infinite() {
        0.0
    } else {
        1.0 - (-t / t1).exp()
    };
    let b = state.bloch();
    let coh = (1.0 - p).sqrt() * (-gamma_phi * t).exp();
    let z = 1.0 - (1.0 - p) * (1.0 - b.z);
    QubitState::from_bloch(Bloch::new(b.x * coh, b.y * coh, z))
}

/// One row of the correlated tomography table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TomographyRow {
    pub center: f64,
    pub count: u64,
    /// Posterior averaged over records in the bin.
    pub predicted_z: f64,
    pub sampled_z: f64,
    pub sigma_z: f64,
    pub predicted_x: f64,
    pub sampled_x: f64,
    pub sigma_x: f64,
    pub sampled_y: f64,
    pub sigma_y: f64,
    /// Bin had at least 100 shots in every tomography basis.
    pub compared: bool,
    /// Every sampled component within 4 sigma of the prediction.
    pub consistent: bool,
}

#[derive(Default, Clone, Copy)]
struct TomoAcc {
    n: [u64; 3],
    sum: [i64; 3],
}

/// Weak measurement followed by Pauli tomography, conditioned on the record bin.
pub fn correlated_tomography(
    prepared: &QubitState,
    shots: usize,
    strength: MeasurementStrength,
    axis: MeasurementAxis,
    model: &ReadoutModel,
    streams: &StreamFactory,
) -> Result<Vec<TomographyRow>> {
    require(shots >= 10_000, || {
        format!("need at least 1e4 shots, got {shots}")
    })?;
    model.validate()?;
    let streams = streams.derive(crate::rng::domain::TOMOGRAPHY);
    let per_shot: Vec<(usize, usize, i64)> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i as u64);
            let w = weak_measure(prepared, strength, axis, &mut rng)?;
            let basis: usize = rng.random_range(0..3);
            let b = w.post.bloch();
            let comp = [b.x, b.y, b.z][basis];
            let u: f64 = rng.random();
            let outcome = if u < 0.5 * (1.0 + comp) { 1 } else { -1 };
            Ok((model.bin_index(w.j), basis, outcome))
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![TomoAcc::default(); model.bins];
    for (k, basis, o) in per_shot {
        acc[k].n[basis] += 1;
        acc[k].sum[basis] += o;
    }
    let centers = model.centers();
    let rows = acc
        .iter()
        .zip(centers)
        .enumerate()
        .map(|(k, (a, c))| {
            let (lo, hi) = model.limits(k);
            let post = bin_update(prepared, strength, axis, lo, hi)
                .ok()
                .and_then(|(_, s)| s)
                .map(|s| s.bloch());
            let pred = post.unwrap_or(Bloch::new(f64::NAN, f64::NAN, f64::NAN));
            let mean = |i: usize| {
                if a.n[i] > 0 {
                    a.sum[i] as f64 / a.n[i] as f64
                } else {
                    f64::NAN
                }
            };
            let sigma = |i: usize, p: f64| ((1.0 - p * p).max(0.0) / a.n[i].max(1) as f64).sqrt();
            let (sx, sy, sz) = (mean(0), mean(1), mean(2));
            let (ex, ey, ez) = (sigma(0, pred.x), sigma(1, pred.y), sigma(2, pred.z));
            let compared = a.n.iter().all(|&n| n >= 100);
            let within = |s: f64, p: f64, e: f64| (s - p).abs() <= 4.0 * e + 1e-12;
            let consistent = compared
                && within(sx, pred.x, ex)
                && within(sy, pred.y, ey)
                && within(sz, pred.z, ez);
            TomographyRow {
                center: c,
                count: a.n.iter().sum(),
                predicted_z: pred.z,
                sampled_z: sz,
                sigma_z: ez,
                predicted_x: pred.x,
                sampled_x: sx,
                sigma_x: ex,
                sampled_y: sy,
                sigma_y: ey,
                compared,
                consistent,
            }
        })
        .collect();
    Ok(rows)
}
