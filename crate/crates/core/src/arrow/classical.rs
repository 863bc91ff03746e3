// SPDX-License-Identifier: Apache-2.0
//! Classical Markov-chain stochastic thermodynamics: Gillespie sampling,
//! entropy bookkeeping, and exhaustive path enumeration for discrete-time
//! protocols.
//!
//! Heat is energy flowing into the system at jumps; work is the energy
//! change at protocol breakpoints. Entropy is in units of k.

use crate::error::{require, Error, Result};
use crate::stats::compensated_sum;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const BALANCE_TOL: f64 = 1e-10;

fn boltzmann(energies: &[f64], temperature: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies
        .iter()
        .map(|e| (-(e - e0) / temperature).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn free_energy(energies: &[f64], temperature: f64) -> f64 {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let z: f64 = energies
        .iter()
        .map(|e| (-(e - e0) / temperature).exp())
        .sum();
    e0 - temperature * z.ln()
}

/// Continuous-time chain; `rates[to][from]` is the generator with the
/// diagonal holding minus the total exit rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalChain {
    energies: Vec<f64>,
    rates: Vec<Vec<f64>>,
    temperature: f64,
}

impl ClassicalChain {
    /// Off-diagonal entries of `rates` are used; the diagonal is filled in.
    pub fn new(energies: Vec<f64>, mut rates: Vec<Vec<f64>>, temperature: f64) -> Result<Self> {
        let n = energies.len();
        require(n >= 2, || "a chain needs at least two states".into())?;
        require(temperature > 0.0 && temperature.is_finite(), || {
            "temperature must be positive".into()
        })?;
        require(energies.iter().all(|e| e.is_finite()), || {
            "energies must be finite".into()
        })?;
        require(
            rates.len() == n && rates.iter().all(|r| r.len() == n),
            || format!("rate matrix must be {n}x{n}"),
        )?;
        for to in 0..n {
            for from in 0..n {
                if to != from && !(rates[to][from] >= 0.0 && rates[to][from].is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "rate {from}->{to} is {}",
                        rates[to][from]
                    )));
                }
            }
        }
        for from in 0..n {
            rates[from][from] = -(0..n)
                .filter(|&to| to != from)
                .map(|to| rates[to][from])
                .sum::<f64>();
        }
        Ok(Self {
            energies,
            rates,
            temperature,
        })
    }

    /// Rates gamma exp(-beta (E_to - E_from) / 2), which satisfy detailed balance.
    pub fn arrhenius(energies: Vec<f64>, gamma: f64, temperature: f64) -> Result<Self> {
        require(gamma > 0.0, || "gamma must be positive".into())?;
        let n = energies.len();
        let rates = (0..n)
            .map(|to| {
                (0..n)
                    .map(|from| {
                        if to == from {
                            0.0
                        } else {
                            gamma * (-(energies[to] - energies[from]) / (2.0 * temperature)).exp()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(energies, rates, temperature)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rates[to][from]
    }

    pub fn exit_rate(&self, from: usize) -> f64 {
        -self.rates[from][from]
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn equilibrium(&self) -> Vec<f64> {
        boltzmann(&self.energies, self.temperature)
    }

    pub fn free_energy(&self) -> f64 {
        free_energy(&self.energies, self.temperature)
    }

    /// Largest |H[m][m'] p[m'] - H[m'][m] p[m]| relative to the flux scale.
    pub fn detailed_balance_error(&self) -> f64 {
        let p = self.equilibrium();
        let n = self.energies.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    let (f, r) = (self.rates[a][b] * p[b], self.rates[b][a] * p[a]);
                    worst = worst.max((f - r).abs() / f.abs().max(r.abs()).max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }

    pub fn satisfies_detailed_balance(&self) -> bool {
        self.detailed_balance_error() <= BALANCE_TOL
    }

    /// Rates rescaled by exp(-beta [dE'_{to,from} - dE_{to,from}] / 2) so
    /// that detailed balance holds for the new energies.
    pub fn with_energies(&self, energies: &[f64]) -> Result<Self> {
        require(energies.len() == self.energies.len(), || {
            "energy vector length changed".into()
        })?;
        let n = energies.len();
        let b = 1.0 / self.temperature;
        let rates = (0..n)
            .map(|to| {
                (0..n)
                    .map(|from| {
                        if to == from {
                            0.0
                        } else {
                            let d_new = energies[to] - energies[from];
                            let d_old = self.energies[to] - self.energies[from];
                            self.rates[to][from] * (-b * (d_new - d_old) / 2.0).exp()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(energies.to_vec(), rates, self.temperature)
    }
}

/// Piecewise-constant energy protocol: at each time the energies switch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergySchedule {
    pub steps: Vec<(f64, Vec<f64>)>,
}

impl EnergySchedule {
    fn validate(&self, n: usize, t_final: f64) -> Result<()> {
        let mut last = 0.0;
        for (t, e) in &self.steps {
            require(*t > last && *t < t_final, || {
                format!("breakpoint {t} out of order or outside (0, t_final)")
            })?;
            require(e.len() == n, || {
                "breakpoint energies have the wrong length".into()
            })?;
            last = *t;
        }
        Ok(())
    }

    /// Chain in force at time `t` (breakpoints apply from their time onward).
    fn chain_at(&self, chain: &ClassicalChain, t: f64) -> Result<ClassicalChain> {
        let mut c = chain.clone();
        for (tb, e) in &self.steps {
            if *tb <= t {
                c = c.with_energies(e)?;
            }
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub time: f64,
    pub from: usize,
    pub to: usize,
    pub heat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpTrajectory {
    pub initial_state: usize,
    pub final_state: usize,
    pub jumps: Vec<Jump>,
    /// (time, work) at each protocol breakpoint.
    pub work_steps: Vec<(f64, f64)>,
    pub initial_energies: Vec<f64>,
    pub final_energies: Vec<f64>,
    pub t_final: f64,
}

/// Energetics and entropy of one trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoRecord {
    pub de: f64,
    pub w: f64,
    pub q_heat: f64,
    pub ds: f64,
    pub ds_r: f64,
    pub ds_i: f64,
    /// ln(P_F / P_B) from boundary terms and rate ratios at the jumps.
    pub ln_forward_backward: f64,
}

impl ThermoRecord {
    pub fn first_law_error(&self) -> f64 {
        (self.de - self.w - self.q_heat).abs()
    }
}

/// Gillespie sampling over [0, t_final]. `initial` of `None` draws the start
/// state from the equilibrium distribution of the initial energies.
pub fn classical_simulate<R: Rng + ?Sized>(
    chain: &ClassicalChain,
    schedule: &EnergySchedule,
    t_final: f64,
    initial: Option<usize>,
    rng: &mut R,
) -> Result<(JumpTrajectory, ThermoRecord)> {
    require(t_final > 0.0 && t_final.is_finite(), || {
        "t_final must be positive".into()
    })?;
    let n = chain.energies.len();
    schedule.validate(n, t_final)?;
    let m0 = match initial {
        Some(m) => {
            require(m < n, || format!("initial state {m} out of range"))?;
            m
        }
        None => sample_index(&chain.equilibrium(), rng.random()),
    };
    let mut current = chain.clone();
    let mut m = m0;
    let mut t = 0.0;
    let mut jumps = Vec::new();
    let mut work_steps = Vec::new();
    let mut breaks = schedule.steps.iter().peekable();
    loop {
        let horizon = breaks.peek().map_or(t_final, |(tb, _)| *tb);
        let lambda = current.exit_rate(m);
        let tau = if lambda > 0.0 {
            Distribution::<f64>::sample(&Exp1, rng) / lambda
        } else {
            f64::INFINITY
        };
        if t + tau < horizon {
            t += tau;
            let u: f64 = rng.random::<f64>() * lambda;
            let mut acc = 0.0;
            let mut to = m;
            for cand in (0..n).filter(|&k| k != m) {
                acc += current.rate(m, cand);
                to = cand;
                if u < acc {
                    break;
                }
            }
            jumps.push(Jump {
                time: t,
                from: m,
                to,
                heat: current.energies[to] - current.energies[m],
            });
            m = to;
            continue;
        }
        match breaks.next() {
            Some((tb, e)) => {
                work_steps.push((*tb, e[m] - current.energies[m]));
                current = current.with_energies(e)?;
                t = *tb;
            }
            None => break,
        }
    }
    let traj = JumpTrajectory {
        initial_state: m0,
        final_state: m,
        jumps,
        work_steps,
        initial_energies: chain.energies.clone(),
        final_energies: current.energies.clone(),
        t_final,
    };
    let p_i = chain.equilibrium();
    let p_f = current.equilibrium();
    let record = classical_entropy_production(&traj, chain, schedule, &p_i, &p_f)?;
    Ok((traj, record))
}

fn sample_index(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        acc += pk;
        if u < acc {
            return k;
        }
    }
    p.len() - 1
}

/// Entropy decomposition with boundary distributions `p_initial` (forward
/// start) and `p_final` (backward start).
pub fn classical_entropy_production(
    traj: &JumpTrajectory,
    chain: &ClassicalChain,
    schedule: &EnergySchedule,
    p_initial: &[f64],
    p_final: &[f64],
) -> Result<ThermoRecord> {
    let n = chain.energies.len();
    require(p_initial.len() == n && p_final.len() == n, || {
        "boundary distributions have the wrong length".into()
    })?;
    // Breakpoint rescaling preserves detailed balance, so the initial chain decides.
    if !chain.satisfies_detailed_balance() {
        return Err(Error::UnsupportedChain(format!(
            "detailed balance violated (error {:e})",
            chain.detailed_balance_error()
        )));
    }
    let (pi, pf) = (p_initial[traj.initial_state], p_final[traj.final_state]);
    require(pi > 0.0 && pf > 0.0, || {
        "boundary distribution vanishes on the trajectory endpoints".into()
    })?;
    let q_heat = compensated_sum(traj.jumps.iter().map(|j| j.heat));
    let w = compensated_sum(traj.work_steps.iter().map(|s| s.1));
    let de = traj.final_energies[traj.final_state] - traj.initial_energies[traj.initial_state];
    let ds = pi.ln() - pf.ln();
    let ds_r = q_heat / chain.temperature;
    let mut ln_ratio = vec![pi.ln() - pf.ln()];
    for j in &traj.jumps {
        let at = schedule.chain_at(chain, j.time)?;
        ln_ratio.push(at.rate(j.from, j.to).ln() - at.rate(j.to, j.from).ln());
    }
    Ok(ThermoRecord {
        de,
        w,
        q_heat,
        ds,
        ds_r,
        ds_i: ds - ds_r,
        ln_forward_backward: compensated_sum(ln_ratio),
    })
}

/// Step of a discrete-time protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProtocolOp {
    /// Instantaneous energy switch (work).
    Switch(Vec<f64>),
    /// One heat-bath step at the current energies (heat).
    Relax,
}

/// Discrete-time protocol with heat-bath transition matrix
/// T[to][from] = gamma p_eq(to) for to != from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProtocol {
    pub temperature: f64,
    pub gamma: f64,
    pub initial_energies: Vec<f64>,
    pub ops: Vec<ProtocolOp>,
}

/// One enumerated path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathRecord {
    /// Start state followed by the state after every relaxation step.
    pub states: Vec<usize>,
    pub probability: f64,
    pub reverse_probability: f64,
    pub work: f64,
    pub heat: f64,
    pub ds: f64,
    pub ds_i: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BruteForceReport {
    pub paths: Vec<PathRecord>,
    pub total_probability: f64,
    /// Largest |ln(P_F/P_R) - dS_i| over paths.
    pub max_path_error: f64,
    /// Largest |ln[P_F(s)/P_R(-s)] - s| over distinct entropy-production values.
    pub max_crooks_error: f64,
    pub jarzynski_lhs: f64,
    pub jarzynski_rhs: f64,
    /// For protocols equal to their reverse: largest |ln[P(s)/P(-s)] - s|.
    pub symmetric_ft_error: Option<f64>,
}

impl DiscreteProtocol {
    pub fn validate(&self) -> Result<()> {
        let n = self.initial_energies.len();
        require(n >= 2, || "a protocol needs at least two states".into())?;
        require(self.temperature > 0.0, || {
            "temperature must be positive".into()
        })?;
        require(self.gamma > 0.0 && self.gamma <= 1.0, || {
            "gamma must be in (0, 1]".into()
        })?;
        for op in &self.ops {
            if let ProtocolOp::Switch(e) = op {
                require(e.len() == n && e.iter().all(|x| x.is_finite()), || {
                    "switch energies have the wrong length".into()
                })?;
            }
        }
        Ok(())
    }

    pub fn relax_steps(&self) -> usize {
        self.ops
            .iter()
            .filter(|o| matches!(o, ProtocolOp::Relax))
            .count()
    }

    pub fn final_energies(&self) -> Vec<f64> {
        self.ops
            .iter()
            .fold(self.initial_energies.clone(), |e, op| match op {
                ProtocolOp::Switch(new) => new.clone(),
                ProtocolOp::Relax => e,
            })
    }

    pub fn transition_matrix(&self, energies: &[f64]) -> Vec<Vec<f64>> {
        let p = boltzmann(energies, self.temperature);
        let n = energies.len();
        let mut t = vec![vec![0.0; n]; n];
        for from in 0..n {
            for to in 0..n {
                if to != from {
                    t[to][from] = self.gamma * p[to];
                }
            }
            t[from][from] = 1.0 - self.gamma * (1.0 - p[from]);
        }
        t
    }

    /// Time-reversed protocol: operations in reverse order, each switch
    /// returning to the energies that preceded it.
    pub fn reverse(&self) -> DiscreteProtocol {
        let mut before = Vec::with_capacity(self.ops.len());
        let mut e = self.initial_energies.clone();
        for op in &self.ops {
            before.push(e.clone());
            if let ProtocolOp::Switch(new) = op {
                e = new.clone();
            }
        }
        let ops = self
            .ops
            .iter()
            .zip(before)
            .rev()
            .map(|(op, prev)| match op {
                ProtocolOp::Switch(_) => ProtocolOp::Switch(prev),
                ProtocolOp::Relax => ProtocolOp::Relax,
            })
            .collect();
        DiscreteProtocol {
            temperature: self.temperature,
            gamma: self.gamma,
            initial_energies: e,
            ops,
        }
    }

    pub fn free_energy_change(&self) -> f64 {
        free_energy(&self.final_energies(), self.temperature)
            - free_energy(&self.initial_energies, self.temperature)
    }

    /// Probability, work and heat of `states` under this protocol.
    fn walk(&self, states: &[usize], p0: &[f64]) -> (f64, f64, f64) {
        let mut e = self.initial_energies.clone();
        let (mut ln_p, mut work, mut heat) = (p0[states[0]].ln(), 0.0, 0.0);
        let mut k = 0;
        for op in &self.ops {
            match op {
                ProtocolOp::Switch(new) => {
                    work += new[states[k]] - e[states[k]];
                    e = new.clone();
                }
                ProtocolOp::Relax => {
                    let t = self.transition_matrix(&e);
                    ln_p += t[states[k + 1]][states[k]].ln();
                    heat += e[states[k + 1]] - e[states[k]];
                    k += 1;
                }
            }
        }
        (ln_p.exp(), work, heat)
    }
}

fn all_paths(n: usize, len: usize) -> Vec<Vec<usize>> {
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut v = vec![0; len];
            for slot in v.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            v
        })
        .collect()
}

fn key(sigma: f64) -> i64 {
    (sigma * 1e9).round() as i64
}

/// Exhaustive enumeration of every path of `protocol`, with forward
/// boundary `p_initial` and backward boundary `p_final`.
pub fn enumerate_paths(
    protocol: &DiscreteProtocol,
    p_initial: &[f64],
    p_final: &[f64],
) -> Result<BruteForceReport> {
    protocol.validate()?;
    let n = protocol.initial_energies.len();
    require(p_initial.len() == n && p_final.len() == n, || {
        "boundary distributions have the wrong length".into()
    })?;
    let len = protocol.relax_steps() + 1;
    require((n as f64).powi(len as i32) <= 1e6, || {
        "too many paths to enumerate".into()
    })?;
    let reverse = protocol.reverse();
    let beta = 1.0 / protocol.temperature;
    let mut paths = Vec::new();
    for states in all_paths(n, len) {
        let (p, work, heat) = protocol.walk(&states, p_initial);
        let rev: Vec<usize> = states.iter().rev().copied().collect();
        let (pr, _, _) = reverse.walk(&rev, p_final);
        let ds = p_initial[states[0]].ln() - p_final[states[len - 1]].ln();
        paths.push(PathRecord {
            states,
            probability: p,
            reverse_probability: pr,
            work,
            heat,
            ds,
            ds_i: ds - beta * heat,
        });
    }
    let total_probability = compensated_sum(paths.iter().map(|p| p.probability));
    let max_path_error = paths
        .iter()
        .filter(|p| p.probability > 0.0 && p.reverse_probability > 0.0)
        .map(|p| ((p.probability / p.reverse_probability).ln() - p.ds_i).abs())
        .fold(0.0, f64::max);

    // Crooks: the reverse protocol is enumerated on its own and grouped by its own sigma.
    let mut forward: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for p in &paths {
        let e = forward.entry(key(p.ds_i)).or_insert((p.ds_i, 0.0));
        e.1 += p.probability;
    }
    let mut backward: BTreeMap<i64, f64> = BTreeMap::new();
    for states in all_paths(n, len) {
        let (p, _, heat) = reverse.walk(&states, p_final);
        let sigma = p_final[states[0]].ln() - p_initial[states[len - 1]].ln() - beta * heat;
        *backward.entry(key(sigma)).or_insert(0.0) += p;
    }
    let mut max_crooks_error = 0.0f64;
    for (k, (sigma, pf)) in &forward {
        let pr = backward.get(&-k).copied().unwrap_or(0.0);
        if *pf > 0.0 && pr > 0.0 {
            max_crooks_error = max_crooks_error.max(((pf / pr).ln() - sigma).abs());
        } else if *pf > 0.0 || pr > 0.0 {
            max_crooks_error = f64::INFINITY;
        }
    }

    let jarzynski_lhs =
        compensated_sum(paths.iter().map(|p| p.probability * (-beta * p.work).exp()));
    let jarzynski_rhs = (-beta * protocol.free_energy_change()).exp();

    let symmetric_ft_error = (reverse == *protocol).then(|| {
        let mut worst = 0.0f64;
        for (k, (sigma, pf)) in &forward {
            if let Some((_, pm)) = forward.get(&-k) {
                if *pf > 0.0 && *pm > 0.0 {
                    worst = worst.max(((pf / pm).ln() - sigma).abs());
                }
            }
        }
        worst
    });

    Ok(BruteForceReport {
        paths,
        total_probability,
        max_path_error,
        max_crooks_error,
        jarzynski_lhs,
        jarzynski_rhs,
        symmetric_ft_error,
    })
}

/// Equilibrium distribution at the given energies.
pub fn equilibrium(energies: &[f64], temperature: f64) -> Vec<f64> {
    boltzmann(energies, temperature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFactory;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_state(eps: f64) -> ClassicalChain {
        ClassicalChain::arrhenius(vec![0.0, eps], 1.0, 1.0).unwrap()
    }

    fn protocol(relax: usize) -> DiscreteProtocol {
        let mut ops = Vec::new();
        for k in 0..relax {
            ops.push(ProtocolOp::Switch(vec![0.0, 0.5 + 0.3 * k as f64]));
            ops.push(ProtocolOp::Relax);
        }
        DiscreteProtocol {
            temperature: 0.8,
            gamma: 0.7,
            initial_energies: vec![0.0, 0.2],
            ops,
        }
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        let c = ClassicalChain::arrhenius(vec![0.0, 0.4, 1.1], 2.0, 0.7).unwrap();
        for from in 0..3 {
            let s: f64 = (0..3).map(|to| c.rate(from, to)).sum();
            assert!(s.abs() < 1e-14);
        }
        assert!(c.satisfies_detailed_balance());
    }

    #[test]
    fn negative_rates_rejected() {
        assert!(
            ClassicalChain::new(vec![0.0, 1.0], vec![vec![0.0, -1.0], vec![1.0, 0.0]], 1.0)
                .is_err()
        );
    }

    #[test]
    fn no_drive_no_jumps() {
        let c =
            ClassicalChain::new(vec![0.0, 1.0], vec![vec![0.0, 0.0], vec![0.0, 0.0]], 1.0).unwrap();
        let mut rng = StreamFactory::new(0).stream(0);
        let (t, r) =
            classical_simulate(&c, &EnergySchedule::default(), 5.0, Some(0), &mut rng).unwrap();
        assert!(t.jumps.is_empty());
        assert_eq!((r.w, r.q_heat, r.de), (0.0, 0.0, 0.0));
    }

    #[test]
    fn equilibrium_endpoints_without_jumps_give_zeros() {
        let c = two_state(0.7);
        let traj = JumpTrajectory {
            initial_state: 1,
            final_state: 1,
            jumps: vec![],
            work_steps: vec![],
            initial_energies: c.energies().to_vec(),
            final_energies: c.energies().to_vec(),
            t_final: 1.0,
        };
        let p = c.equilibrium();
        let r =
            classical_entropy_production(&traj, &c, &EnergySchedule::default(), &p, &p).unwrap();
        assert_eq!(
            (r.ds, r.ds_r, r.ds_i, r.ln_forward_backward),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn single_jump_heat() {
        let c = two_state(0.9);
        let traj = JumpTrajectory {
            initial_state: 0,
            final_state: 1,
            jumps: vec![Jump {
                time: 0.5,
                from: 0,
                to: 1,
                heat: 0.9,
            }],
            work_steps: vec![],
            initial_energies: vec![0.0, 0.9],
            final_energies: vec![0.0, 0.9],
            t_final: 1.0,
        };
        let p = c.equilibrium();
        let r =
            classical_entropy_production(&traj, &c, &EnergySchedule::default(), &p, &p).unwrap();
        assert_abs_diff_eq!(r.q_heat, 0.9);
        assert_abs_diff_eq!(r.de, 0.9);
        assert_abs_diff_eq!(r.ds_i, r.ln_forward_backward, epsilon = 1e-12);
    }

    #[test]
    fn detailed_balance_violation_is_unsupported() {
        let c = ClassicalChain::new(
            vec![0.0, 1.0, 0.5],
            vec![
                vec![0.0, 1.0, 0.1],
                vec![0.3, 0.0, 2.0],
                vec![1.5, 0.2, 0.0],
            ],
            1.0,
        )
        .unwrap();
        let mut rng = StreamFactory::new(0).stream(0);
        assert!(matches!(
            classical_simulate(&c, &EnergySchedule::default(), 1.0, Some(0), &mut rng),
            Err(Error::UnsupportedChain(_))
        ));
    }

    #[test]
    fn driven_chain_first_law_and_entropy_identity() {
        let c = two_state(0.3);
        let schedule = EnergySchedule {
            steps: vec![
                (0.5, vec![0.0, 1.0]),
                (1.0, vec![0.2, 1.4]),
                (1.5, vec![0.0, 0.3]),
            ],
        };
        let f = StreamFactory::with_domain(1, crate::rng::domain::CLASSICAL);
        let mut worst_first = 0.0f64;
        let mut worst_ln = 0.0f64;
        let mut ift = Vec::with_capacity(100_000);
        for i in 0..100_000 {
            let (_, r) = classical_simulate(&c, &schedule, 2.0, None, &mut f.stream(i)).unwrap();
            worst_first = worst_first.max(r.first_law_error());
            worst_ln = worst_ln.max((r.ds_i - r.ln_forward_backward).abs());
            assert_abs_diff_eq!(r.ds, r.ds_r + r.ds_i, epsilon = 1e-12);
            ift.push((-r.ds_i).exp());
        }
        assert!(worst_first < 1e-12, "{worst_first}");
        assert!(worst_ln < 1e-10, "{worst_ln}");
        let (m, e) = crate::stats::mean_and_sem(&ift);
        assert!((m - 1.0).abs() < 5.0 * e, "{m} +- {e}");
    }

    #[test]
    fn brute_force_ft_short_protocols() {
        for relax in 1..=8 {
            let p = protocol(relax);
            let pi = equilibrium(&p.initial_energies, p.temperature);
            let pf = equilibrium(&p.final_energies(), p.temperature);
            let r = enumerate_paths(&p, &pi, &pf).unwrap();
            assert_eq!(r.paths.len(), 1 << (relax + 1));
            assert!((r.total_probability - 1.0).abs() < 1e-12);
            assert!(r.max_path_error < 1e-10);
            assert!(
                r.max_crooks_error < 1e-10,
                "{relax}: {}",
                r.max_crooks_error
            );
            assert!((r.jarzynski_lhs - r.jarzynski_rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_protocol_ft() {
        let e0 = vec![0.0, 0.4];
        let e1 = vec![0.0, 1.2];
        let p = DiscreteProtocol {
            temperature: 1.0,
            gamma: 0.5,
            initial_energies: e0.clone(),
            ops: vec![
                ProtocolOp::Switch(e1.clone()),
                ProtocolOp::Relax,
                ProtocolOp::Relax,
                ProtocolOp::Switch(e0.clone()),
            ],
        };
        assert_eq!(p.reverse(), p);
        let eq = equilibrium(&e0, 1.0);
        let r = enumerate_paths(&p, &eq, &eq).unwrap();
        assert!(r.symmetric_ft_error.unwrap() < 1e-10);
    }

    #[test]
    fn reverse_is_an_involution() {
        let p = protocol(4);
        assert_eq!(p.reverse().reverse(), p);
        assert_eq!(p.reverse().initial_energies, p.final_energies());
    }

    proptest! {
        #[test]
        fn heat_bath_matrix_is_stochastic_and_balanced(e in proptest::collection::vec(-2.0..2.0f64, 2..5), gamma in 0.05..1.0f64, t in 0.2..3.0f64) {
            let p = DiscreteProtocol { temperature: t, gamma, initial_energies: e.clone(), ops: vec![] };
            let m = p.transition_matrix(&e);
            let eq = equilibrium(&e, t);
            for from in 0..e.len() {
                let s: f64 = (0..e.len()).map(|to| m[to][from]).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
                for to in 0..e.len() {
                    prop_assert!(m[to][from] >= 0.0);
                    prop_assert!((m[to][from] * eq[from] - m[from][to] * eq[to]).abs() < 1e-12);
                }
            }
        }
    }
}
