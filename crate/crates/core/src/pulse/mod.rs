// SPDX-License-Identifier: Apache-2.0
//! AWG pulse descriptors, sequence matrices and their compilation.
//!
//! Time is measured in sample points. A pulse with nonzero `ssm_freq`
//! (cycles per point) is sampled as `amplitude * cos(2 pi f t + phase)`
//! with `t` the absolute sample index within the step, so every pulse in a
//! step shares one carrier phase reference.

mod export;
mod rabi;
mod sequence;

pub use export::{
    decode, decode_matrix, encode, encode_matrix, port_names, read_csv, read_qseq, write_csv,
    write_qseq, HEADER_LEN, MAGIC, VERSION,
};
pub use rabi::{compile_rabi, CavityPulse, DurationSweep, MarkerRef, RabiConfig, TriggerPulse};
pub use sequence::{
    add_sweep, ChannelList, SequenceMatrix, SweepSpec, SweepType, Target, CHANNELS,
};

use crate::error::{require, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub duration: usize,
    pub start_time: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub ssm_freq: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Pulse {
    pub fn new(duration: usize, start_time: usize, amplitude: f64) -> Result<Self> {
        Self::with_ssm(duration, start_time, amplitude, 0.0, 0.0)
    }

    pub fn with_ssm(
        duration: usize,
        start_time: usize,
        amplitude: f64,
        ssm_freq: f64,
        phase: f64,
    ) -> Result<Self> {
        let p = Self {
            duration,
            start_time,
            amplitude,
            ssm_freq,
            phase,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require((-1.0..=1.0).contains(&self.amplitude), || {
            format!("amplitude {} outside [-1, 1]", self.amplitude)
        })?;
        require(self.ssm_freq.is_finite() && self.phase.is_finite(), || {
            "ssm_freq and phase must be finite".into()
        })?;
        Ok(())
    }

    pub fn end(&self) -> usize {
        self.start_time + self.duration
    }

    /// Sample at absolute index `t`, ignoring the pulse window.
    pub fn sample(&self, t: usize) -> f64 {
        if self.ssm_freq == 0.0 {
            self.amplitude
        } else {
            self.amplitude * (TAU * self.ssm_freq * t as f64 + self.phase).cos()
        }
    }

    /// Programmed amplitudes over a step of `points` samples.
    pub fn make(&self, points: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if self.end() > points {
            return Err(Error::Bounds(format!(
                "pulse ends at {} beyond step length {points}",
                self.end()
            )));
        }
        let mut out = vec![0.0; points];
        for (t, v) in out
            .iter_mut()
            .enumerate()
            .take(self.end())
            .skip(self.start_time)
        {
            *v = self.sample(t);
        }
        Ok(out)
    }

    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Pulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Pulse(duration={}, start_time={}, amplitude={}",
            self.duration, self.start_time, self.amplitude
        )?;
        if self.ssm_freq != 0.0 {
            write!(f, ", ssm_freq={}, phase={}", self.ssm_freq, self.phase)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_pulse() {
        let p = Pulse::new(4, 0, 0.5).unwrap();
        assert_eq!(
            p.make(8).unwrap(),
            vec![0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn ssm_pulse_uses_absolute_phase() {
        let p = Pulse::with_ssm(4, 0, 1.0, 0.25, 0.0).unwrap();
        let v = p.make(8).unwrap();
        for (a, b) in v[..4].iter().zip([1.0, 0.0, -1.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let q = Pulse { start_time: 2, ..p }.make(8).unwrap();
        for (a, b) in q[2..6].iter().zip([-1.0, 0.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pulse_outside_step_is_a_bounds_error() {
        assert!(matches!(
            Pulse::new(5, 4, 1.0).unwrap().make(8),
            Err(Error::Bounds(_))
        ));
        assert!(Pulse::new(1, 0, 1.5).is_err());
    }

    #[test]
    fn copy_is_independent() {
        let a = Pulse::new(10, 4000, 1.0).unwrap();
        let mut b = a;
        b.amplitude = 0.2;
        assert_eq!((a.amplitude, b.amplitude), (1.0, 0.2));
    }

    #[test]
    fn describe_lists_fields() {
        let d = Pulse::new(37, 4000, 1.0).unwrap().describe();
        assert!(d.contains("4000") && d.contains("duration=37") && d.contains("amplitude=1"));
        assert!(!d.contains("ssm"));
        let s = Pulse::with_ssm(37, 4000, 1.0, 0.01, 0.5)
            .unwrap()
            .describe();
        assert!(s.contains("ssm_freq=0.01") && s.contains("phase=0.5"));
    }
}
