// SPDX-License-Identifier: Apache-2.0
//! Quantum trajectories, their time reversal and the Q statistic.
//!
//! A trajectory is an initial Bloch vector, a list of events and a final
//! Bloch vector. The forward density multiplies the record density of every
//! weak event and the probability of every projective event along the
//! replayed state. The backward density replays the reversed event list
//! from the negated final state.

mod classical;
mod feedback;
mod ft;

pub use classical::{
    classical_entropy_production, classical_simulate, enumerate_paths, equilibrium,
    BruteForceReport, ClassicalChain, DiscreteProtocol, EnergySchedule, Jump, JumpTrajectory,
    PathRecord, ProtocolOp, ThermoRecord,
};
pub use feedback::{
    eigenstate_q_ln_density, run_feedback_ensemble, weak_ensemble, FeedbackConfig,
    FeedbackEnsemble, FeedbackProtocol, PriorMode, ShotRecord,
};
pub use ft::{detailed_ft_check, integral_ft_and_second_law, DftRow, DftTable, IftReport};

use crate::error::{Error, Result};
use crate::qubit::{outcome_prob, rotate_y, Bloch, MeasurementAxis, Outcome, QubitState};
use crate::weak::{ln_outcome_density, weak_update, MeasurementStrength};
use serde::{Deserialize, Serialize};

/// Tolerance for replay consistency of stored endpoints.
pub const REPLAY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Event {
    /// Resets the state; allowed only as the first event.
    Prepare(Bloch),
    RotateY(f64),
    Weak {
        j: f64,
        s: f64,
        axis: f64,
    },
    Project {
        axis: f64,
        outcome: Outcome,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: Bloch,
    pub events: Vec<Event>,
    pub final_state: Bloch,
}

/// Forward and backward log densities of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathDensities {
    pub ln_forward: f64,
    pub ln_backward: f64,
}

impl PathDensities {
    pub fn forward(&self) -> f64 {
        self.ln_forward.exp()
    }

    pub fn backward(&self) -> f64 {
        self.ln_backward.exp()
    }

    pub fn q(&self) -> f64 {
        self.ln_forward - self.ln_backward
    }
}

fn check_structure(events: &[Event]) -> Result<()> {
    if events
        .iter()
        .skip(1)
        .any(|e| matches!(e, Event::Prepare(_)))
    {
        return Err(Error::Replay(
            "prepare is only allowed as the first event".into(),
        ));
    }
    for e in events {
        match *e {
            Event::Weak { j, s, axis }
                if !(j.is_finite() && s > 0.0 && s.is_finite() && axis.is_finite()) =>
            {
                return Err(Error::Replay(format!(
                    "invalid weak event j={j}, s={s}, axis={axis}"
                )));
            }
            Event::RotateY(t) if !t.is_finite() => {
                return Err(Error::Replay("non-finite rotation".into()))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Replays `events` from `start`, returning the log path density and the
/// final state. A zero-probability projective outcome gives `-inf` and no state.
fn replay(start: Bloch, events: &[Event]) -> Result<(f64, Option<QubitState>)> {
    let mut state = QubitState::from_bloch(start)?;
    let mut ln_p = 0.0;
    for e in events {
        match *e {
            Event::Prepare(b) => state = QubitState::from_bloch(b)?,
            Event::RotateY(theta) => state = rotate_y(&state, theta),
            Event::Weak { j, s, axis } => {
                let strength = MeasurementStrength::new(s)?;
                let axis = MeasurementAxis::new(axis)?;
                ln_p += ln_outcome_density(&state, strength, axis, j);
                state = weak_update(&state, j, strength, axis)?;
            }
            Event::Project { axis, outcome } => {
                let axis = MeasurementAxis::new(axis)?;
                let p = outcome_prob(&state, &axis, outcome);
                if p <= 0.0 {
                    return Ok((f64::NEG_INFINITY, None));
                }
                ln_p += p.ln();
                let d = axis.direction();
                state = QubitState::from_bloch(if outcome == Outcome::Plus { d } else { d.neg() })?;
            }
        }
    }
    Ok((ln_p, Some(state)))
}

fn reversed_events(t: &Trajectory) -> Vec<Event> {
    let mut out = Vec::with_capacity(t.events.len());
    if matches!(t.events.first(), Some(Event::Prepare(_))) {
        out.push(Event::Prepare(t.final_state.neg()));
    }
    for e in t.events.iter().rev() {
        match *e {
            Event::Prepare(_) => {}
            Event::RotateY(theta) => out.push(Event::RotateY(-theta)),
            other => out.push(other),
        }
    }
    out
}

impl Trajectory {
    /// Builds a trajectory whose final state is the replayed end state.
    pub fn replay(initial: Bloch, events: Vec<Event>) -> Result<Self> {
        check_structure(&events)?;
        let start = match events.first() {
            Some(Event::Prepare(b)) => *b,
            _ => initial,
        };
        match replay(start, &events)? {
            (_, Some(state)) => Ok(Self {
                initial: start,
                events,
                final_state: state.bloch(),
            }),
            _ => Err(Error::Replay(
                "a projective event has zero probability".into(),
            )),
        }
    }

    /// Whether replaying the events from `initial` reproduces `final_state`.
    pub fn is_replayable(&self) -> bool {
        check_structure(&self.events).is_ok()
            && matches!(replay(self.initial, &self.events), Ok((_, Some(s))) if s.bloch().max_diff(&self.final_state) <= REPLAY_TOL)
    }

    /// Active time reversal: endpoints swapped and negated, event order
    /// reversed, rotation angles negated, records kept.
    pub fn reverse(&self) -> Trajectory {
        Trajectory {
            initial: self.final_state.neg(),
            events: reversed_events(self),
            final_state: self.initial.neg(),
        }
    }
}

/// Forward and backward densities. Accepts trajectories that replay in
/// either direction, so that reversed trajectories are valid inputs.
pub fn forward_backward_probability(t: &Trajectory) -> Result<PathDensities> {
    check_structure(&t.events)?;
    if let Some(Event::Prepare(b)) = t.events.first() {
        if b.max_diff(&t.initial) > REPLAY_TOL {
            return Err(Error::Replay(
                "prepare event disagrees with the initial state".into(),
            ));
        }
    }
    let rev = t.reverse();
    if !t.is_replayable() && !rev.is_replayable() {
        return Err(Error::Replay(
            "stored endpoints are not reproduced in either direction".into(),
        ));
    }
    let (ln_forward, _) = replay(t.initial, &t.events)?;
    let (ln_backward, _) = replay(rev.initial, &rev.events)?;
    if ln_forward == f64::NEG_INFINITY && ln_backward == f64::NEG_INFINITY {
        return Err(Error::Replay(
            "both directions have zero probability".into(),
        ));
    }
    Ok(PathDensities {
        ln_forward,
        ln_backward,
    })
}

/// Q = ln(P_F / P_B); `+inf` marks an absolutely irreversible trajectory.
pub fn log_ratio_q(t: &Trajectory) -> Result<f64> {
    Ok(forward_backward_probability(t)?.q())
}

/// Single weak event trajectory starting from `initial`.
pub fn single_weak(initial: Bloch, j: f64, s: f64) -> Result<Trajectory> {
    Trajectory::replay(initial, vec![Event::Weak { j, s, axis: 0.0 }])
}
