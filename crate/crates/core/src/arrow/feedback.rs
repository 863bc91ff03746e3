// SPDX-License-Identifier: Apache-2.0
//! Weak-measurement ensembles with causal and anticausal feedback.

use super::{log_ratio_q, single_weak, Event, Trajectory};
use crate::error::{require, Error, Result};
use crate::qubit::{Bloch, MeasurementAxis, QubitState};
use crate::rng::{domain, StreamFactory};
use crate::stats::normal_ln_pdf;
use crate::weak::{weak_measure, MeasurementStrength};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackProtocol {
    /// Weak measurement, then the corrective rotation it prescribes.
    Cof,
    /// Rotation first, then the weak measurement that would prescribe it.
    Acof,
    /// Same angle draw and post-selection as COF, rotation not applied.
    NoFeedback,
}

impl FeedbackProtocol {
    fn stream_id(self) -> u64 {
        match self {
            FeedbackProtocol::Cof => 1,
            FeedbackProtocol::Acof => 2,
            FeedbackProtocol::NoFeedback => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub protocol: FeedbackProtocol,
    pub shots: usize,
    pub s: f64,
    pub window: f64,
    pub prior: Bloch,
}

impl FeedbackConfig {
    pub fn new(protocol: FeedbackProtocol, shots: usize, s: f64) -> Self {
        Self {
            protocol,
            shots,
            s,
            window: PI / 20.0,
            prior: Bloch::new(1.0, 0.0, 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShotRecord {
    pub id: u64,
    pub q: f64,
    pub accepted: bool,
    pub theta_app: f64,
    pub j: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeedbackEnsemble {
    pub shots: Vec<ShotRecord>,
    pub acceptance: f64,
}

impl FeedbackEnsemble {
    pub fn accepted_q(&self) -> Vec<f64> {
        self.shots
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.q)
            .collect()
    }
}

fn shot(
    cfg: &FeedbackConfig,
    strength: MeasurementStrength,
    phi0: f64,
    id: u64,
    streams: &StreamFactory,
) -> Result<ShotRecord> {
    let mut rng = streams.stream(id);
    let theta_app: f64 = rng.random_range(-FRAC_PI_4..FRAC_PI_4);
    let z = MeasurementAxis::z();
    let s = cfg.s;
    let (trajectory, prescribed, j) = match cfg.protocol {
        FeedbackProtocol::Cof | FeedbackProtocol::NoFeedback => {
            let w = weak_measure(&QubitState::from_bloch(cfg.prior)?, strength, z, &mut rng)?;
            let b = w.post.bloch();
            let mut events = vec![Event::Weak {
                j: w.j,
                s,
                axis: 0.0,
            }];
            if cfg.protocol == FeedbackProtocol::Cof {
                events.push(Event::RotateY(theta_app));
            }
            (
                Trajectory::replay(cfg.prior, events)?,
                b.z.atan2(b.x) - phi0,
                w.j,
            )
        }
        FeedbackProtocol::Acof => {
            let rotated = Trajectory::replay(cfg.prior, vec![Event::RotateY(theta_app)])?;
            let w = weak_measure(
                &QubitState::from_bloch(rotated.final_state)?,
                strength,
                z,
                &mut rng,
            )?;
            let presc = phi0 - ((phi0.sin()).atanh() - s * w.j).tanh().asin();
            (
                Trajectory::replay(
                    cfg.prior,
                    vec![
                        Event::RotateY(theta_app),
                        Event::Weak {
                            j: w.j,
                            s,
                            axis: 0.0,
                        },
                    ],
                )?,
                presc,
                w.j,
            )
        }
    };
    let accepted = (theta_app - prescribed).abs() <= cfg.window;
    Ok(ShotRecord {
        id,
        q: log_ratio_q(&trajectory)?,
        accepted,
        theta_app,
        j,
    })
}

/// Runs `cfg.shots` feedback trajectories; every shot is returned with its
/// acceptance flag.
pub fn run_feedback_ensemble(
    cfg: &FeedbackConfig,
    streams: &StreamFactory,
) -> Result<FeedbackEnsemble> {
    require(cfg.shots >= 10_000, || {
        format!("need at least 1e4 shots, got {}", cfg.shots)
    })?;
    require(cfg.window > 0.0, || "window must be positive".into())?;
    let strength = MeasurementStrength::new(cfg.s)?;
    QubitState::from_bloch(cfg.prior)?;
    require(cfg.prior.y.abs() < 1e-12, || {
        "prior must lie in the X-Z plane".into()
    })?;
    if cfg.protocol == FeedbackProtocol::Acof {
        require((cfg.prior.norm() - 1.0).abs() < 1e-9, || {
            "anticausal feedback needs a pure prior".into()
        })?;
    }
    let phi0 = cfg.prior.z.atan2(cfg.prior.x);
    let streams = streams
        .derive(domain::FEEDBACK)
        .derive(cfg.protocol.stream_id());
    let shots: Vec<ShotRecord> = (0..cfg.shots as u64)
        .into_par_iter()
        .map(|i| shot(cfg, strength, phi0, i, &streams))
        .collect::<Result<_>>()?;
    let accepted = shots.iter().filter(|r| r.accepted).count();
    if accepted == 0 {
        return Err(Error::SamplingFailure(
            "no trajectory passed post-selection".into(),
        ));
    }
    Ok(FeedbackEnsemble {
        acceptance: accepted as f64 / cfg.shots as f64,
        shots,
    })
}

/// How a prior Bloch vector seeds single-step trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    /// Every shot starts in the prior state itself.
    Coherent,
    /// Every shot starts in a measurement eigenstate drawn with weights (1 +- z)/2.
    EigenstateResolved,
}

/// Q values of `shots` single weak measurements along z.
pub fn weak_ensemble(
    prior: Bloch,
    s: f64,
    shots: usize,
    mode: PriorMode,
    streams: &StreamFactory,
) -> Result<Vec<f64>> {
    require(shots > 0, || "shots must be positive".into())?;
    let strength = MeasurementStrength::new(s)?;
    let state = QubitState::from_bloch(prior)?;
    let sd = strength.record_variance().sqrt();
    let streams = streams.derive(domain::PRIOR).derive(match mode {
        PriorMode::Coherent => 1,
        PriorMode::EigenstateResolved => 2,
    });
    (0..shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i);
            match mode {
                PriorMode::Coherent => {
                    let w = weak_measure(&state, strength, MeasurementAxis::z(), &mut rng)?;
                    log_ratio_q(&single_weak(prior, w.j, s)?)
                }
                PriorMode::EigenstateResolved => {
                    let u: f64 = rng.random();
                    let m = if u < 0.5 * (1.0 + prior.z) { 1.0 } else { -1.0 };
                    let n: f64 = StandardNormal.sample(&mut rng);
                    log_ratio_q(&single_weak(Bloch::new(0.0, 0.0, m), m + sd * n, s)?)
                }
            }
        })
        .collect()
}

/// Exact density of Q = 2 s m j for the eigenstate-resolved ensemble: a
/// Gaussian with mean 2s and variance 4s for either eigenstate.
pub fn eigenstate_q_ln_density(q: f64, s: f64) -> f64 {
    normal_ln_pdf(q, 2.0 * s, 4.0 * s)
}
