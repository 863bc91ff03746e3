// SPDX-License-Identifier: Apache-2.0
//! Monte-Carlo and exact evaluation of the EUR experiment, and sampled weak values.

use super::shannon_bits;
use crate::error::{require, Error, Result};
use crate::qubit::{
    outcome_prob, projective_measure, rotate_y, MeasurementAxis, Outcome, QubitState,
};
use crate::rng::{domain, StreamFactory};
use crate::stats::compensated_sum;
use crate::weak::{bin_update, decay_channel, weak_measure, MeasurementStrength, ReadoutModel};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Detector and decay imperfections for the EUR experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EurNoise {
    pub readout_fidelity: f64,
    pub eta: f64,
    /// Energy relaxation time; infinite disables decay.
    pub t1: f64,
    /// Delay between the weak measurement and the final readout.
    pub dt: f64,
}

impl Default for EurNoise {
    fn default() -> Self {
        Self {
            readout_fidelity: 1.0,
            eta: 1.0,
            t1: f64::INFINITY,
            dt: 0.0,
        }
    }
}

impl EurNoise {
    pub fn validate(&self) -> Result<()> {
        require((0.0..=1.0).contains(&self.readout_fidelity), || {
            "readout_fidelity must be in [0, 1]".into()
        })?;
        require(self.eta > 0.0 && self.eta <= 1.0, || {
            "eta must be in (0, 1]".into()
        })?;
        require(self.t1 > 0.0 && self.dt >= 0.0, || {
            "t1 must be positive and dt non-negative".into()
        })?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EurSimConfig {
    pub theta_rho: f64,
    pub theta_a: f64,
    pub theta_f: f64,
    pub s: f64,
    pub shots: usize,
    pub readout: ReadoutModel,
    pub noise: EurNoise,
}

/// Entropy estimates with plug-in standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EurEstimate {
    pub h_i: f64,
    pub h_i_sigma: f64,
    pub h_af: f64,
    pub h_af_sigma: f64,
    pub h_af_norm: f64,
    pub h_af_reference: f64,
}

impl EurEstimate {
    pub fn sigma(&self) -> f64 {
        self.h_i_sigma.hypot(self.h_af_sigma)
    }
}

fn entropy_with_sigma(counts: &[u64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let ps: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
    let h = shannon_bits(&ps);
    let m2: f64 = ps
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2() * p.log2())
        .sum();
    (h, ((m2 - h * h).max(0.0) / nf).sqrt())
}

fn flip<R: Rng + ?Sized>(o: Outcome, fidelity: f64, rng: &mut R) -> Outcome {
    if fidelity >= 1.0 {
        return o;
    }
    let u: f64 = rng.random();
    if u < fidelity {
        o
    } else {
        o.flip()
    }
}

fn prepared(theta_rho: f64) -> QubitState {
    rotate_y(&QubitState::ground(), theta_rho)
}

fn sample_info(cfg: &EurSimConfig, streams: &StreamFactory) -> [u64; 2] {
    let rho = prepared(cfg.theta_rho);
    let z = MeasurementAxis::z();
    let streams = streams.derive(domain::EUR_INFO);
    let plus: u64 = (0..cfg.shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i as u64);
            let o = projective_measure(&rho, &z, &mut rng).outcome;
            u64::from(flip(o, cfg.noise.readout_fidelity, &mut rng) == Outcome::Plus)
        })
        .sum();
    [plus, cfg.shots as u64 - plus]
}

fn sample_joint(
    cfg: &EurSimConfig,
    theta_a: f64,
    theta_f: f64,
    streams: &StreamFactory,
) -> Result<Vec<u64>> {
    let rho = prepared(cfg.theta_rho);
    let strength = MeasurementStrength::with_efficiency(cfg.s, cfg.noise.eta)?;
    let ax_a = MeasurementAxis::new(theta_a)?;
    let ax_f = MeasurementAxis::new(theta_f)?;
    let bins = cfg.readout.bins;
    let idx: Vec<usize> = (0..cfg.shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i as u64);
            let w = weak_measure(&rho, strength, ax_a, &mut rng)?;
            let post = if cfg.noise.dt > 0.0 && cfg.noise.t1.is_finite() {
                decay_channel(&w.post, cfg.noise.dt, cfg.noise.t1, 0.0)?
            } else {
                w.post
            };
            let f = projective_measure(&post, &ax_f, &mut rng).outcome;
            let f = flip(f, cfg.noise.readout_fidelity, &mut rng);
            let k = cfg.readout.bin_index(w.j);
            Ok(2 * k + usize::from(f == Outcome::Minus))
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; 2 * bins];
    for k in idx {
        counts[k] += 1;
    }
    Ok(counts)
}

fn validate(cfg: &EurSimConfig) -> Result<()> {
    require(cfg.shots >= 100_000, || {
        format!("need at least 1e5 shots, got {}", cfg.shots)
    })?;
    cfg.readout.validate()?;
    cfg.noise.validate()
}

/// One grid point with a caller-supplied aligned-axes reference H(AF).
pub fn simulate_eur_point(
    cfg: &EurSimConfig,
    h_af_reference: f64,
    streams: &StreamFactory,
) -> Result<EurEstimate> {
    validate(cfg)?;
    let (h_i, h_i_sigma) = entropy_with_sigma(&sample_info(cfg, streams));
    let joint = sample_joint(
        cfg,
        cfg.theta_a,
        cfg.theta_f,
        &streams.derive(domain::EUR_JOINT),
    )?;
    let (h_af, h_af_sigma) = entropy_with_sigma(&joint);
    Ok(EurEstimate {
        h_i,
        h_i_sigma,
        h_af,
        h_af_sigma,
        h_af_norm: h_af - h_af_reference,
        h_af_reference,
    })
}

/// Monte-Carlo H(I) and H(AF); the normalisation subtracts a simulated
/// theta_a = theta_f = 0 run with the same preparation.
pub fn simulate_eur(cfg: &EurSimConfig, streams: &StreamFactory) -> Result<EurEstimate> {
    validate(cfg)?;
    let reference = sample_joint(cfg, 0.0, 0.0, &streams.derive(domain::EUR_REFERENCE))?;
    simulate_eur_point(cfg, entropy_with_sigma(&reference).0, streams)
}

/// Exact H(I) and bin-integrated H(AF) for the same model as the simulator.
pub fn exact_eur_entropies(
    theta_rho: f64,
    theta_a: f64,
    theta_f: f64,
    strength: MeasurementStrength,
    readout: &ReadoutModel,
    noise: &EurNoise,
) -> Result<(f64, f64)> {
    readout.validate()?;
    noise.validate()?;
    let rho = prepared(theta_rho);
    let z = MeasurementAxis::z();
    let fid = noise.readout_fidelity;
    let p0 = outcome_prob(&rho, &z, Outcome::Plus);
    let p0 = fid * p0 + (1.0 - fid) * (1.0 - p0);
    let h_i = shannon_bits(&[p0, 1.0 - p0]);

    let strength = MeasurementStrength::with_efficiency(strength.s(), noise.eta)?;
    let ax_a = MeasurementAxis::new(theta_a)?;
    let ax_f = MeasurementAxis::new(theta_f)?;
    let mut probs = Vec::with_capacity(2 * readout.bins);
    for k in 0..readout.bins {
        let (a, b) = readout.limits(k);
        let (weight, post) = bin_update(&rho, strength, ax_a, a, b)?;
        let Some(post) = post else {
            probs.extend([0.0, 0.0]);
            continue;
        };
        let post = if noise.dt > 0.0 && noise.t1.is_finite() {
            decay_channel(&post, noise.dt, noise.t1, 0.0)?
        } else {
            post
        };
        let pf = outcome_prob(&post, &ax_f, Outcome::Plus);
        let pf = fid * pf + (1.0 - fid) * (1.0 - pf);
        probs.extend([weight * pf, weight * (1.0 - pf)]);
    }
    Ok((h_i, shannon_bits(&probs)))
}

/// Sampled weak value with the raw conditional mean and the
/// strength-normalised estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakValueEstimate {
    /// Mean of accepted records (sum / shots divided by acceptance fraction).
    pub raw: f64,
    pub raw_stderr: f64,
    /// Estimate of Re A_wv after inverting the finite-strength relation.
    pub estimate: f64,
    pub stderr: f64,
    pub acceptance: f64,
    pub accepted: u64,
    /// Few acceptances, large relative error, or a non-invertible mean.
    pub unreliable: bool,
}

/// Inverts E[j | f] = 2 q w / ((1 + q) + w^2 (q - 1)), q = e^{s/2}, for the
/// branch that reduces to w = E as s -> 0. Returns (w, invertible).
pub fn invert_conditional_mean(mean: f64, s: f64) -> (f64, bool) {
    if mean == 0.0 {
        return (0.0, true);
    }
    let q = (s / 2.0).exp();
    let qm1 = (s / 2.0).exp_m1();
    let disc = q * q - (q + 1.0) * qm1 * mean * mean;
    if disc < 0.0 {
        return (q / (qm1 * mean), false);
    }
    // Rationalised root avoids cancellation for small s.
    (mean * (q + 1.0) / (q + disc.sqrt()), true)
}

/// Prepares eigenstate `i` of sz, measures `a_axis` weakly, post-selects
/// outcome `f` along `f_axis`, and estimates Re A_wv.
pub fn weak_value_sampled(
    i: Outcome,
    f_axis: &MeasurementAxis,
    f: Outcome,
    a_axis: &MeasurementAxis,
    strength: MeasurementStrength,
    shots: usize,
    streams: &StreamFactory,
) -> Result<WeakValueEstimate> {
    require(shots >= 10_000, || {
        format!("need at least 1e4 shots, got {shots}")
    })?;
    require(strength.eta() == 1.0, || {
        "finite-strength normalisation assumes unit efficiency".into()
    })?;
    let rho = QubitState::from_bloch(MeasurementAxis::z().direction())?;
    let rho = if i == Outcome::Plus {
        rho
    } else {
        rotate_y(&rho, std::f64::consts::PI)
    };
    let streams = streams.derive(domain::WEAK_VALUE);
    const BLOCK: usize = 1 << 14;
    let blocks = shots.div_ceil(BLOCK);
    let partial: Vec<(u64, f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let (mut n, mut sum, mut sum2) = (0u64, Vec::new(), Vec::new());
            for idx in b * BLOCK..((b + 1) * BLOCK).min(shots) {
                let mut rng = streams.stream(idx as u64);
                let w = weak_measure(&rho, strength, *a_axis, &mut rng)?;
                if projective_measure(&w.post, f_axis, &mut rng).outcome == f {
                    n += 1;
                    sum.push(w.j);
                    sum2.push(w.j * w.j);
                }
            }
            Ok((n, compensated_sum(sum), compensated_sum(sum2)))
        })
        .collect::<Result<_>>()?;
    let accepted: u64 = partial.iter().map(|p| p.0).sum();
    if accepted == 0 {
        return Err(Error::SamplingFailure(
            "no shot passed post-selection".into(),
        ));
    }
    let sum = compensated_sum(partial.iter().map(|p| p.1));
    let sum2 = compensated_sum(partial.iter().map(|p| p.2));
    let n = shots as f64;
    let acceptance = accepted as f64 / n;
    let raw = (sum / n) / acceptance;
    let var = if accepted > 1 {
        (sum2 / accepted as f64 - raw * raw).max(0.0) * accepted as f64 / (accepted - 1) as f64
    } else {
        f64::INFINITY
    };
    let raw_stderr = (var / accepted as f64).sqrt();
    let s = strength.s();
    let (estimate, invertible) = invert_conditional_mean(raw, s);
    let h = (raw_stderr * 1e-3).max(1e-9);
    let slope =
        (invert_conditional_mean(raw + h, s).0 - invert_conditional_mean(raw - h, s).0) / (2.0 * h);
    let stderr = (slope * raw_stderr).abs();
    let unreliable = !invertible
        || accepted < 1000
        || !stderr.is_finite()
        || stderr > 0.1 * estimate.abs().max(1.0);
    Ok(WeakValueEstimate {
        raw,
        raw_stderr,
        estimate,
        stderr,
        acceptance,
        accepted,
        unreliable,
    })
}
