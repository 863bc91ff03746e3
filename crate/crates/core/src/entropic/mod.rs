// SPDX-License-Identifier: Apache-2.0
//! Uncertainty quantifiers and bounds, weak values, and the weak-measurement
//! entropic uncertainty bound.

mod sim;

pub use sim::{
    exact_eur_entropies, simulate_eur, simulate_eur_point, weak_value_sampled, EurEstimate,
    EurNoise, EurSimConfig, WeakValueEstimate,
};

use crate::error::{require, Error, Result};
use crate::qubit::{MeasurementAxis, Op2, Outcome, QubitState};
use crate::weak::{kraus_operator, MeasurementStrength, ReadoutModel};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

/// Probability floor when taking logarithms in bound minimisations.
pub const PROB_FLOOR: f64 = 1e-12;

/// Discrete distribution with optional numeric outcome values.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    outcomes: Vec<(String, Option<f64>, f64)>,
}

impl DiscreteDistribution {
    pub fn new(outcomes: Vec<(String, Option<f64>, f64)>) -> Result<Self> {
        require(!outcomes.is_empty(), || {
            "distribution needs at least one outcome".into()
        })?;
        for (label, _, p) in &outcomes {
            require(*p >= 0.0 && p.is_finite(), || {
                format!("negative probability for {label}")
            })?;
        }
        let total: f64 = outcomes.iter().map(|o| o.2).sum();
        require((total - 1.0).abs() <= 1e-9, || {
            format!("probabilities sum to {total}")
        })?;
        Ok(Self { outcomes })
    }

    pub fn from_probabilities(ps: &[f64]) -> Result<Self> {
        Self::new(
            ps.iter()
                .enumerate()
                .map(|(i, &p)| (i.to_string(), None, p))
                .collect(),
        )
    }

    pub fn from_values(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(x, p)| (x.to_string(), Some(x), p))
                .collect(),
        )
    }

    pub fn uniform_values(xs: &[f64]) -> Result<Self> {
        let p = 1.0 / xs.len() as f64;
        Self::from_values(&xs.iter().map(|&x| (x, p)).collect::<Vec<_>>())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.2).collect()
    }

    pub fn outcomes(&self) -> &[(String, Option<f64>, f64)] {
        &self.outcomes
    }
}

pub fn variance(dist: &DiscreteDistribution) -> Result<f64> {
    let mut vals = Vec::with_capacity(dist.outcomes.len());
    for (label, v, p) in &dist.outcomes {
        match v {
            Some(x) => vals.push((*x, *p)),
            None => {
                return Err(Error::Domain(format!(
                    "outcome '{label}' has no numeric value; variance undefined"
                )))
            }
        }
    }
    let mean: f64 = vals.iter().map(|(x, p)| x * p).sum();
    Ok(vals.iter().map(|(x, p)| p * (x - mean) * (x - mean)).sum())
}

/// Shannon entropy in bits of a probability vector, with 0 log 0 = 0.
pub fn shannon_bits(ps: &[f64]) -> f64 {
    -ps.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

pub fn shannon_entropy(dist: &DiscreteDistribution) -> f64 {
    shannon_bits(&dist.probabilities())
}

pub fn renyi_entropy(dist: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    require(alpha > 0.0, || {
        format!("alpha must be positive, got {alpha}")
    })?;
    require(alpha != 1.0, || "alpha = 1 is the Shannon entropy".into())?;
    let norm = dist
        .probabilities()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p.powf(alpha))
        .sum::<f64>()
        .powf(1.0 / alpha);
    Ok(alpha / (1.0 - alpha) * norm.log2())
}

/// Half the magnitude of <[A, B]>.
pub fn robertson_bound(a: &Op2, b: &Op2, state: &QubitState) -> f64 {
    let comm = a * b - b * a;
    0.5 * (state.matrix() * comm).trace().norm()
}

/// Standard deviation of an observable in a state.
pub fn std_dev(op: &Op2, state: &QubitState) -> f64 {
    let m = (state.matrix() * op).trace().re;
    let m2 = (state.matrix() * op * op).trace().re;
    (m2 - m * m).max(0.0).sqrt()
}

/// Left-hand side dA dB of the Robertson relation.
pub fn uncertainty_product(a: &Op2, b: &Op2, state: &QubitState) -> f64 {
    std_dev(a, state) * std_dev(b, state)
}

fn overlaps(a: &MeasurementAxis, b: &MeasurementAxis) -> Vec<f64> {
    let mut out = Vec::with_capacity(4);
    for oa in Outcome::BOTH {
        for ob in Outcome::BOTH {
            let va = a.eigenvector(oa);
            let vb = b.eigenvector(ob);
            let ip: Complex64 = va[0].conj() * vb[0] + va[1].conj() * vb[1];
            out.push(ip.norm());
        }
    }
    out
}

pub fn trivial_bound() -> f64 {
    0.0
}

/// Minimum over eigenvector pairs of -2 log2[(1 + |<a|b>|)/2].
pub fn deutsch_bound(a: &MeasurementAxis, b: &MeasurementAxis) -> f64 {
    overlaps(a, b)
        .into_iter()
        .map(|o| -2.0 * ((1.0 + o) / 2.0).log2())
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// -log2 of the maximal squared eigenvector overlap, (1 + |cos(theta_a - theta_b)|)/2
/// for axes in the xz plane.
pub fn maassen_uffink_bound(a: &MeasurementAxis, b: &MeasurementAxis) -> f64 {
    let c = 0.5 * (1.0 + (a.theta() - b.theta()).cos().abs());
    (-c.log2()).max(0.0)
}

/// POVM element with the spectral checks applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PovmElement {
    pub matrix: Op2,
}

impl PovmElement {
    pub fn new(matrix: Op2) -> Result<Self> {
        let herm = crate::qubit::max_abs_diff(&matrix, &matrix.adjoint());
        require(herm < 1e-12, || {
            format!("POVM element not Hermitian ({herm:e})")
        })?;
        let [lo, hi] = hermitian_eigenvalues(&matrix);
        require(lo >= -1e-12 && hi <= 1.0 + 1e-12, || {
            format!("POVM eigenvalues {lo}, {hi} outside [0, 1]")
        })?;
        Ok(Self { matrix })
    }
}

/// Eigenvalues (ascending) of a 2x2 Hermitian matrix.
pub fn hermitian_eigenvalues(m: &Op2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)].norm();
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - r, mean + r]
}

/// Largest singular value of a 2x2 complex matrix.
pub fn largest_singular_value(m: &Op2) -> f64 {
    let g = m.adjoint() * m;
    hermitian_eigenvalues(&g)[1].max(0.0).sqrt()
}

/// Operator-norm and trace quantities of M = P_i K^dag P_f K.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PovmNorm {
    pub op_norm: f64,
    pub trace: f64,
    pub trace_bound: f64,
}

pub fn povm_norm_bound(pi_i: &Op2, k: &Op2, pi_f: &Op2) -> PovmNorm {
    let m = pi_i * k.adjoint() * pi_f * k;
    let trace = m.trace().re.max(0.0);
    PovmNorm {
        op_norm: largest_singular_value(&m),
        trace,
        trace_bound: trace.sqrt(),
    }
}

/// Taylor weights p_j = sqrt(s/2pi) exp(-s(j^2+1)/2) and g_j = s j / 2.
pub fn taylor_weights(j: f64, s: f64) -> Result<(f64, f64)> {
    require(s > 0.0, || format!("strength must be positive, got {s}"))?;
    let p = (s / (2.0 * PI)).sqrt() * (-s * (j * j + 1.0) / 2.0).exp();
    Ok((p, s * j / 2.0))
}

/// Pre- and post-selected expectation value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakValue {
    pub re: f64,
    pub im: f64,
    pub anomalous: bool,
}

impl WeakValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// <f|A|i>/<f|i> for eigenstates of the given axes.
pub fn weak_value(
    i_axis: &MeasurementAxis,
    i: Outcome,
    f_axis: &MeasurementAxis,
    f: Outcome,
    a_axis: &MeasurementAxis,
) -> Result<WeakValue> {
    let vi = i_axis.eigenvector(i);
    let vf = f_axis.eigenvector(f);
    let a = a_axis.operator();
    let avi = [
        a[(0, 0)] * vi[0] + a[(0, 1)] * vi[1],
        a[(1, 0)] * vi[0] + a[(1, 1)] * vi[1],
    ];
    let num = vf[0].conj() * avi[0] + vf[1].conj() * avi[1];
    let den = vf[0].conj() * vi[0] + vf[1].conj() * vi[1];
    if den.norm() < 1e-12 {
        return Err(Error::SingularSelection(
            "pre- and post-selected states are orthogonal".into(),
        ));
    }
    let w = num / den;
    Ok(WeakValue {
        re: w.re,
        im: w.im,
        anomalous: w.re.abs() > 1.0,
    })
}

/// Imperfections entering p(f|i).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct SelectionNoise {
    /// Probability that the final readout reports the correct outcome.
    pub readout_fidelity: f64,
    /// Probability that the prepared state decays to |0> before readout.
    pub decay_prob: f64,
}

impl Default for SelectionNoise {
    fn default() -> Self {
        Self {
            readout_fidelity: 1.0,
            decay_prob: 0.0,
        }
    }
}

/// p(f|i) for preparation in eigenstate `i` of sz and readout along `f_axis`.
pub fn conditional_probability(
    i: Outcome,
    f_axis: &MeasurementAxis,
    f: Outcome,
    noise: &SelectionNoise,
) -> f64 {
    let zi = i.sign();
    let z = 1.0 - (1.0 - noise.decay_prob) * (1.0 - zi);
    let p_true = 0.5 * (1.0 + f.sign() * z * f_axis.theta().cos());
    let fid = noise.readout_fidelity;
    (fid * p_true + (1.0 - fid) * (1.0 - p_true)).clamp(0.0, 1.0)
}

/// Weak-measurement entropic bound with its minimiser.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EurBound {
    pub value: f64,
    pub argmin_i: i32,
    pub argmin_j: f64,
    pub argmin_f: i32,
    /// Grid points where |2 Re(g_j A_wv)| >= 1.
    pub taylor_violations: usize,
    pub max_taylor_term: f64,
}

/// min over i, f and bin-centre j of -log2(p_j p_{f|i}) - (2/ln2) Re(g_j A_wv).
pub fn eur_bound(
    theta_a: f64,
    theta_f: f64,
    strength: MeasurementStrength,
    readout: &ReadoutModel,
) -> Result<EurBound> {
    readout.validate()?;
    let s = strength.s();
    let ax_a = MeasurementAxis::new(theta_a)?;
    let ax_f = MeasurementAxis::new(theta_f)?;
    let ax_i = MeasurementAxis::z();
    let centers = readout.centers();
    let mut best: Option<EurBound> = None;
    let mut violations = 0usize;
    let mut max_term = 0.0f64;
    for i in Outcome::BOTH {
        for f in Outcome::BOTH {
            let pfi = conditional_probability(i, &ax_f, f, &SelectionNoise::default());
            if pfi <= PROB_FLOOR {
                continue;
            }
            let wv = match weak_value(&ax_i, i, &ax_f, f, &ax_a) {
                Ok(w) => w,
                Err(_) => continue,
            };
            for &j in &centers {
                let (pj, gj) = taylor_weights(j, s)?;
                if pj * pfi <= PROB_FLOOR {
                    continue;
                }
                let t = 2.0 * gj * wv.re;
                max_term = max_term.max(t.abs());
                if t.abs() >= 1.0 {
                    violations += 1;
                }
                let value = -(pj * pfi).log2() - t / LN_2;
                // Mirror-symmetric (i, j, f) and (-i, -j, -f) tie; keep the first.
                if best.is_none_or(|b| value < b.value - 1e-12 * b.value.abs().max(1.0)) {
                    best = Some(EurBound {
                        value,
                        argmin_i: i.as_i32(),
                        argmin_j: j,
                        argmin_f: f.as_i32(),
                        taylor_violations: 0,
                        max_taylor_term: 0.0,
                    });
                }
            }
        }
    }
    let mut b =
        best.ok_or_else(|| Error::Degenerate("every (i, f) pair has zero probability".into()))?;
    b.taylor_violations = violations;
    b.max_taylor_term = max_term;
    Ok(b)
}

/// -log2 of the largest |<f|K_j|i>|^2 over i, f and bin-centre j.
pub fn tomamichel_bound(
    theta_a: f64,
    theta_f: f64,
    strength: MeasurementStrength,
    readout: &ReadoutModel,
) -> Result<f64> {
    let ax_a = MeasurementAxis::new(theta_a)?;
    let ax_f = MeasurementAxis::new(theta_f)?;
    let ax_i = MeasurementAxis::z();
    let mut c = 0.0f64;
    for j in readout.centers() {
        let k = kraus_operator(j, strength, ax_a)?.matrix;
        for i in Outcome::BOTH {
            for f in Outcome::BOTH {
                let n = povm_norm_bound(&ax_i.projector(i).matrix, &k, &ax_f.projector(f).matrix);
                c = c.max(n.trace);
            }
        }
    }
    Ok(-c.log2())
}

/// All bounds for one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub trivial: f64,
    pub deutsch: f64,
    pub mu: f64,
    pub tomamichel: f64,
    pub weak_value_eur: f64,
}

/// Entropies and bounds for one (theta_rho, theta_a, theta_f, s) point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub theta_rho: f64,
    pub theta_a: f64,
    pub theta_f: f64,
    pub s: f64,
    pub h_i: f64,
    pub h_af: f64,
    pub h_af_norm: f64,
    /// Combined statistical sigma of h_i + h_af; zero for exact evaluations.
    pub sigma: f64,
    pub bounds: Bounds,
    pub argmin: (i32, f64, i32),
    pub taylor_violations: usize,
}

impl BoundReport {
    /// H_I + H_AF >= bound - k sigma for every bound.
    pub fn satisfies(&self, k_sigma: f64) -> bool {
        let lhs = self.h_i + self.h_af + k_sigma * self.sigma;
        let b = self.bounds;
        [b.trivial, b.deutsch, b.mu, b.weak_value_eur]
            .iter()
            .all(|&v| lhs >= v)
    }
}

/// Evaluates every bound for the axes (I = z, A, F).
pub fn all_bounds(
    theta_a: f64,
    theta_f: f64,
    strength: MeasurementStrength,
    readout: &ReadoutModel,
) -> Result<(Bounds, EurBound)> {
    let z = MeasurementAxis::z();
    let f = MeasurementAxis::new(theta_f)?;
    let eur = eur_bound(theta_a, theta_f, strength, readout)?;
    Ok((
        Bounds {
            trivial: trivial_bound(),
            deutsch: deutsch_bound(&z, &f),
            mu: maassen_uffink_bound(&z, &f),
            tomamichel: tomamichel_bound(theta_a, theta_f, strength, readout)?,
            weak_value_eur: eur.value,
        },
        eur,
    ))
}

/// Bound report with exact (analytic) entropies.
pub fn bound_report(
    theta_rho: f64,
    theta_a: f64,
    theta_f: f64,
    strength: MeasurementStrength,
    readout: &ReadoutModel,
) -> Result<BoundReport> {
    let (bounds, eur) = all_bounds(theta_a, theta_f, strength, readout)?;
    let noise = EurNoise::default();
    let (h_i, h_af) = exact_eur_entropies(theta_rho, theta_a, theta_f, strength, readout, &noise)?;
    let (_, h_ref) = exact_eur_entropies(theta_rho, 0.0, 0.0, strength, readout, &noise)?;
    Ok(BoundReport {
        theta_rho,
        theta_a,
        theta_f,
        s: strength.s(),
        h_i,
        h_af,
        h_af_norm: h_af - h_ref,
        sigma: 0.0,
        bounds,
        argmin: (eur.argmin_i, eur.argmin_j, eur.argmin_f),
        taylor_violations: eur.taylor_violations,
    })
}
