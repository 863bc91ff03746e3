// SPDX-License-Identifier: Apache-2.0
//! Sequence matrices, the four-channel list and sweep insertion.

use super::Pulse;
use crate::error::{require, Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

pub const CHANNELS: usize = 4;

/// Steps x points samples stored row-major as f32.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceMatrix {
    steps: usize,
    points: usize,
    data: Vec<f32>,
}

impl SequenceMatrix {
    pub fn zeros(steps: usize, points: usize) -> Result<Self> {
        require(steps >= 1, || "a sequence needs at least one step".into())?;
        require(points.is_power_of_two(), || {
            format!("points must be a power of 2, got {points}")
        })?;
        Ok(Self {
            steps,
            points,
            data: vec![0.0; steps * points],
        })
    }

    pub fn from_rows(steps: usize, points: usize, data: Vec<f32>) -> Result<Self> {
        let mut m = Self::zeros(steps, points)?;
        require(data.len() == steps * points, || {
            format!("expected {} samples, got {}", steps * points, data.len())
        })?;
        m.data = data;
        Ok(m)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn row(&self, step: usize) -> &[f32] {
        &self.data[step * self.points..(step + 1) * self.points]
    }

    pub fn row_mut(&mut self, step: usize) -> &mut [f32] {
        &mut self.data[step * self.points..(step + 1) * self.points]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, step: usize, point: usize) -> f32 {
        self.data[step * self.points + point]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Channel,
    Marker1,
    Marker2,
}

impl Target {
    pub fn index(self) -> usize {
        match self {
            Target::Channel => 0,
            Target::Marker1 => 1,
            Target::Marker2 => 2,
        }
    }
}

/// Four entries of [channel, marker 1, marker 2]; `cl[0][1]` is CH1 marker 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelList {
    entries: Vec<[SequenceMatrix; 3]>,
}

impl ChannelList {
    pub fn new(steps: usize, points: usize) -> Result<Self> {
        let m = SequenceMatrix::zeros(steps, points)?;
        Ok(Self {
            entries: vec![[m.clone(), m.clone(), m]; CHANNELS],
        })
    }

    pub(crate) fn from_ports(ports: Vec<SequenceMatrix>) -> Result<Self> {
        require(ports.len() == 3 * CHANNELS, || {
            "a channel list has 12 ports".into()
        })?;
        let (steps, points) = (ports[0].steps, ports[0].points);
        require(
            ports.iter().all(|p| p.steps == steps && p.points == points),
            || "ports differ in shape".into(),
        )?;
        let mut it = ports.into_iter();
        let entries = (0..CHANNELS)
            .map(|_| [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
            .collect();
        Ok(Self { entries })
    }

    pub fn steps(&self) -> usize {
        self.entries[0][0].steps
    }

    pub fn points(&self) -> usize {
        self.entries[0][0].points
    }

    /// Ports in the order CH1, CH1M1, CH1M2, ..., CH4M2.
    pub fn ports(&self) -> impl Iterator<Item = &SequenceMatrix> {
        self.entries.iter().flat_map(|e| e.iter())
    }

    pub fn matrix(&self, channel: usize, target: Target) -> Result<&SequenceMatrix> {
        check_channel(channel)?;
        Ok(&self.entries[channel - 1][target.index()])
    }
}

impl Index<usize> for ChannelList {
    type Output = [SequenceMatrix; 3];

    fn index(&self, i: usize) -> &Self::Output {
        &self.entries[i]
    }
}

impl IndexMut<usize> for ChannelList {
    fn index_mut(&mut self, i: usize) -> &mut Self::Output {
        &mut self.entries[i]
    }
}

fn check_channel(channel: usize) -> Result<()> {
    if !(1..=CHANNELS).contains(&channel) {
        return Err(Error::InvalidParameter(format!(
            "channel must be 1..=4, got {channel}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepType {
    #[default]
    None,
    Duration,
    Amplitude,
    StartTime,
    Phase,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub sweep_type: SweepType,
    #[serde(default)]
    pub start: f64,
    #[serde(default)]
    pub step: f64,
}

impl SweepSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(sweep_type: SweepType, start: f64, step: f64) -> Self {
        Self {
            sweep_type,
            start,
            step,
        }
    }

    /// The base pulse with the swept field set for step `k`.
    pub fn pulse_at(&self, base: &Pulse, k: usize) -> Result<Pulse> {
        let v = self.start + k as f64 * self.step;
        let points = |name: &str| -> Result<usize> {
            if !v.is_finite() || v < 0.0 || (v - v.round()).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "swept {name} {v} at step {k} is not a non-negative integer"
                )));
            }
            Ok(v.round() as usize)
        };
        let mut p = *base;
        match self.sweep_type {
            SweepType::None => {}
            SweepType::Duration => p.duration = points("duration")?,
            SweepType::StartTime => p.start_time = points("start_time")?,
            SweepType::Amplitude => p.amplitude = v,
            SweepType::Phase => p.phase = v,
        }
        p.validate()?;
        Ok(p)
    }
}

/// Adds the swept pulse into every step of one port. Channel samples are
/// clipped to [-1, 1]; marker samples become 1 where positive, else 0.
/// Returns human-readable warnings.
pub fn add_sweep(
    cl: &mut ChannelList,
    channel: usize,
    target: Target,
    base: &Pulse,
    sweep: &SweepSpec,
) -> Result<Vec<String>> {
    check_channel(channel)?;
    let (steps, points) = (cl.steps(), cl.points());
    let pulses: Vec<Pulse> = (0..steps)
        .map(|k| sweep.pulse_at(base, k))
        .collect::<Result<_>>()?;
    for p in &pulses {
        if p.end() > points {
            return Err(Error::Bounds(format!(
                "pulse ends at {} beyond step length {points}",
                p.end()
            )));
        }
    }
    let mut warnings = Vec::new();
    if target != Target::Channel && channel.is_multiple_of(2) {
        warnings.push(format!(
            "CH{channel} markers are redundant and ignored by the instrument"
        ));
    }
    let m = &mut cl[channel - 1][target.index()];
    let mut clipped = 0usize;
    for (k, p) in pulses.iter().enumerate() {
        let row = m.row_mut(k);
        for t in p.start_time..p.end() {
            let v = row[t] as f64 + p.sample(t);
            row[t] = match target {
                Target::Channel => {
                    if !(-1.0..=1.0).contains(&v) {
                        clipped += 1;
                    }
                    v.clamp(-1.0, 1.0) as f32
                }
                Target::Marker1 | Target::Marker2 => f32::from(u8::from(v > 0.0)),
            };
        }
    }
    if clipped > 0 {
        warnings.push(format!("CH{channel}: {clipped} samples clipped to [-1, 1]"));
    }
    Ok(warnings)
}
