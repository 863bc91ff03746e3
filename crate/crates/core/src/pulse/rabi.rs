// SPDX-License-Identifier: Apache-2.0
//! Rabi-oscillation sequence: a duration-swept qubit drive on an I/Q pair,
//! a fixed cavity readout pulse and a digitizer trigger.

use super::{add_sweep, ChannelList, Pulse, SweepSpec, SweepType, Target};
use crate::error::{require, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerRef {
    pub channel: usize,
    pub marker: usize,
}

impl MarkerRef {
    fn target(&self) -> Result<Target> {
        match self.marker {
            1 => Ok(Target::Marker1),
            2 => Ok(Target::Marker2),
            m => Err(crate::Error::InvalidParameter(format!(
                "marker must be 1 or 2, got {m}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DurationSweep {
    pub start: usize,
    pub step: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityPulse {
    pub duration: usize,
    pub start_time: usize,
    pub amplitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerPulse {
    pub duration: usize,
    pub start_time: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiConfig {
    pub steps: usize,
    pub points: usize,
    pub qubit_ch: (usize, usize),
    pub cavity_ch: usize,
    pub trigger_marker: MarkerRef,
    pub ssm_freq: f64,
    pub durations: DurationSweep,
    pub cavity_pulse: CavityPulse,
    pub trigger_pulse: TriggerPulse,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self {
            steps: 51,
            points: 8192,
            qubit_ch: (1, 2),
            cavity_ch: 3,
            trigger_marker: MarkerRef {
                channel: 1,
                marker: 1,
            },
            ssm_freq: 0.01,
            durations: DurationSweep { start: 0, step: 10 },
            cavity_pulse: CavityPulse {
                duration: 2000,
                start_time: 4000,
                amplitude: 1.0,
            },
            trigger_pulse: TriggerPulse {
                duration: 100,
                start_time: 4000,
            },
        }
    }
}

impl RabiConfig {
    pub fn max_duration(&self) -> usize {
        self.durations.start + (self.steps.saturating_sub(1)) * self.durations.step
    }

    /// The qubit pulses share a start so the longest one ends at the cavity pulse.
    pub fn qubit_start(&self) -> usize {
        self.cavity_pulse
            .start_time
            .saturating_sub(self.max_duration())
    }

    pub fn validate(&self) -> Result<()> {
        require(self.points.is_power_of_two(), || {
            format!("points must be a power of 2, got {}", self.points)
        })?;
        require(self.steps >= 1, || "steps must be at least 1".into())?;
        require(self.qubit_ch.0 != self.qubit_ch.1, || {
            "I and Q must use different channels".into()
        })?;
        require(
            self.cavity_ch != self.qubit_ch.0 && self.cavity_ch != self.qubit_ch.1,
            || "cavity channel overlaps the qubit pair".into(),
        )?;
        require(self.max_duration() <= self.cavity_pulse.start_time, || {
            format!(
                "longest qubit pulse {} does not fit before the cavity pulse at {}",
                self.max_duration(),
                self.cavity_pulse.start_time
            )
        })?;
        Ok(())
    }
}

/// Compiles the sequence and returns it with any insertion warnings.
pub fn compile_rabi(cfg: &RabiConfig) -> Result<(ChannelList, Vec<String>)> {
    cfg.validate()?;
    let mut cl = ChannelList::new(cfg.steps, cfg.points)?;
    let mut warnings = Vec::new();
    let sweep = SweepSpec::new(
        SweepType::Duration,
        cfg.durations.start as f64,
        cfg.durations.step as f64,
    );
    let start = cfg.qubit_start();
    let i = Pulse::with_ssm(cfg.durations.start, start, 1.0, cfg.ssm_freq, 0.0)?;
    let q = Pulse {
        phase: FRAC_PI_2,
        ..i
    };
    warnings.extend(add_sweep(
        &mut cl,
        cfg.qubit_ch.0,
        Target::Channel,
        &i,
        &sweep,
    )?);
    warnings.extend(add_sweep(
        &mut cl,
        cfg.qubit_ch.1,
        Target::Channel,
        &q,
        &sweep,
    )?);
    let c = cfg.cavity_pulse;
    let cavity = Pulse::new(c.duration, c.start_time, c.amplitude)?;
    warnings.extend(add_sweep(
        &mut cl,
        cfg.cavity_ch,
        Target::Channel,
        &cavity,
        &SweepSpec::none(),
    )?);
    let t = cfg.trigger_pulse;
    let trigger = Pulse::new(t.duration, t.start_time, 1.0)?;
    warnings.extend(add_sweep(
        &mut cl,
        cfg.trigger_marker.channel,
        cfg.trigger_marker.target()?,
        &trigger,
        &SweepSpec::none(),
    )?);
    Ok((cl, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shapes() {
        let (cl, w) = compile_rabi(&RabiConfig::default()).unwrap();
        assert!(w.is_empty());
        assert!(cl.ports().all(|m| m.steps() == 51 && m.points() == 8192));
        assert_eq!(cl[0][1].row(0)[4000], 1.0);
        assert_eq!(cl[0][1].row(0)[3999], 0.0);
    }

    #[test]
    fn durations_grow_and_end_at_cavity() {
        let cfg = RabiConfig::default();
        let (cl, _) = compile_rabi(&cfg).unwrap();
        let start = cfg.qubit_start();
        assert_eq!(start, 3500);
        for k in 0..cfg.steps {
            let row = cl[0][0].row(k);
            let d = 10 * k;
            assert!(row[..start].iter().all(|v| *v == 0.0));
            assert!(row[start + d..4000].iter().all(|v| *v == 0.0));
            if d > 0 {
                assert_eq!(
                    row[start],
                    (std::f64::consts::TAU * 0.01 * start as f64).cos() as f32
                );
            }
        }
        assert!(cl[2][0].row(7)[4000..6000].iter().all(|v| *v == 1.0));
    }

    #[test]
    fn q_is_i_shifted_by_quarter_period() {
        let cfg = RabiConfig {
            ssm_freq: 0.125,
            ..RabiConfig::default()
        };
        let (cl, _) = compile_rabi(&cfg).unwrap();
        let (i, q) = (cl[0][0].row(50), cl[1][0].row(50));
        let start = cfg.qubit_start();
        for t in start..start + 400 {
            assert!((q[t] - i[t + 2]).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(compile_rabi(&RabiConfig {
            points: 8142,
            ..RabiConfig::default()
        })
        .is_err());
        assert!(compile_rabi(&RabiConfig {
            qubit_ch: (1, 1),
            ..RabiConfig::default()
        })
        .is_err());
        let long = RabiConfig {
            durations: DurationSweep {
                start: 0,
                step: 100,
            },
            ..RabiConfig::default()
        };
        assert!(compile_rabi(&long).is_err());
    }

    #[test]
    fn config_parses_from_partial_json() {
        let cfg: RabiConfig = serde_json::from_str(r#"{"steps": 11, "ssm_freq": 0.05}"#).unwrap();
        assert_eq!(cfg.steps, 11);
        assert_eq!(cfg.points, 8192);
        assert!(serde_json::from_str::<RabiConfig>(r#"{"stepz": 11}"#).is_err());
    }
}
