// SPDX-License-Identifier: Apache-2.0
//! Single-qubit states, Pauli-axis operators, Y rotations and projective measurement.
//!
//! Axes live in the X-Z plane: axis `theta` is the observable
//! `cos(theta) sz + sin(theta) sx`. The state |0> is the +1 eigenstate of sz.

use crate::error::{Error, Result};
use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

/// 2x2 complex operator.
pub type Op2 = Matrix2<Complex64>;

pub const STATE_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity() -> Op2 {
    Op2::identity()
}

pub fn sigma_x() -> Op2 {
    Op2::new(re(0.0), re(1.0), re(1.0), re(0.0))
}

pub fn sigma_y() -> Op2 {
    Op2::new(
        re(0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.0, 1.0),
        re(0.0),
    )
}

pub fn sigma_z() -> Op2 {
    Op2::new(re(1.0), re(0.0), re(0.0), re(-1.0))
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &Op2, b: &Op2) -> f64 {
    (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Bloch-vector coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bloch {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Bloch {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Pure state in the X-Z plane at polar angle `theta` from +z.
    pub fn xz(theta: f64) -> Self {
        Self::new(theta.sin(), 0.0, theta.cos())
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &Bloch) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn neg(&self) -> Bloch {
        Bloch::new(-self.x, -self.y, -self.z)
    }

    pub fn max_diff(&self, other: &Bloch) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

impl fmt::Display for Bloch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

/// Single-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    rho: Op2,
}

impl QubitState {
    /// Validates a density matrix after symmetrising it.
    pub fn from_matrix(m: Op2) -> Result<Self> {
        if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm_err = max_abs_diff(&m, &m.adjoint());
        if herm_err > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm_err:e})"
            )));
        }
        let rho = (m + m.adjoint()) * re(0.5);
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {} != 1", tr.re)));
        }
        let state = Self { rho };
        let b = state.bloch();
        if b.norm() > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (Bloch norm {})",
                b.norm()
            )));
        }
        Ok(state)
    }

    pub fn from_bloch(b: Bloch) -> Result<Self> {
        if !(b.x.is_finite() && b.y.is_finite() && b.z.is_finite()) {
            return Err(Error::InvalidState("non-finite Bloch vector".into()));
        }
        if b.norm() > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("Bloch norm {} > 1", b.norm())));
        }
        Ok(Self {
            rho: bloch_matrix(b),
        })
    }

    /// Builds a state from an unnormalised positive operator; used after
    /// Kraus updates where the trace carries the outcome weight.
    pub(crate) fn from_unnormalized(m: Op2) -> Result<Self> {
        let rho = (m + m.adjoint()) * re(0.5);
        let tr = rho.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalise trace {tr}")));
        }
        let rho = rho / re(tr);
        let mut b = bloch_of(&rho);
        let n = b.norm();
        if n > 1.0 {
            if n > 1.0 + 1e-9 {
                return Err(Error::InvalidState(format!("update left Bloch norm {n}")));
            }
            b = Bloch::new(b.x / n, b.y / n, b.z / n);
            return Ok(Self {
                rho: bloch_matrix(b),
            });
        }
        Ok(Self { rho })
    }

    pub fn ground() -> Self {
        Self {
            rho: bloch_matrix(Bloch::new(0.0, 0.0, 1.0)),
        }
    }

    pub fn excited() -> Self {
        Self {
            rho: bloch_matrix(Bloch::new(0.0, 0.0, -1.0)),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: bloch_matrix(Bloch::new(0.0, 0.0, 0.0)),
        }
    }

    /// Pure state in the X-Z plane at angle `theta` from +z.
    pub fn pure_xz(theta: f64) -> Self {
        Self {
            rho: bloch_matrix(Bloch::xz(theta)),
        }
    }

    pub fn matrix(&self) -> &Op2 {
        &self.rho
    }

    pub fn bloch(&self) -> Bloch {
        bloch_of(&self.rho)
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Re Tr[rho op].
    pub fn expectation(&self, op: &Op2) -> f64 {
        (self.rho * op).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let n = self.bloch().norm();
        [(1.0 - n) / 2.0, (1.0 + n) / 2.0]
    }

    pub fn max_deviation(&self, other: &QubitState) -> f64 {
        max_abs_diff(&self.rho, &other.rho)
    }
}

fn bloch_matrix(b: Bloch) -> Op2 {
    (identity() + sigma_x() * re(b.x) + sigma_y() * re(b.y) + sigma_z() * re(b.z)) * re(0.5)
}

fn bloch_of(rho: &Op2) -> Bloch {
    Bloch::new(
        (rho * sigma_x()).trace().re,
        (rho * sigma_y()).trace().re,
        (rho * sigma_z()).trace().re,
    )
}

/// Bloch vector and purity Tr[rho^2] of a state.
pub fn purity_and_convert(state: &QubitState) -> (Bloch, f64) {
    (state.bloch(), state.purity())
}

/// Measurement outcome of a two-outcome observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            _ => Err(Error::InvalidParameter(format!(
                "outcome must be +1 or -1, got {s}"
            ))),
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

/// Measurement axis in the X-Z plane, angle normalised to [0, 2pi).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementAxis {
    theta: f64,
}

impl MeasurementAxis {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("axis angle must be finite".into()));
        }
        Ok(Self {
            theta: theta.rem_euclid(TAU),
        })
    }

    pub fn z() -> Self {
        Self { theta: 0.0 }
    }

    pub fn x() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit Bloch direction of the +1 eigenstate.
    pub fn direction(&self) -> Bloch {
        Bloch::xz(self.theta)
    }

    pub fn operator(&self) -> Op2 {
        sigma_z() * re(self.theta.cos()) + sigma_x() * re(self.theta.sin())
    }

    /// Eigenvector for `outcome`: (cos t/2, sin t/2) or (-sin t/2, cos t/2).
    pub fn eigenvector(&self, outcome: Outcome) -> [Complex64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        match outcome {
            Outcome::Plus => [re(c), re(s)],
            Outcome::Minus => [re(-s), re(c)],
        }
    }

    pub fn projector(&self, outcome: Outcome) -> Projector {
        let m = (identity() + self.operator() * re(outcome.sign())) * re(0.5);
        Projector {
            matrix: m,
            label: outcome,
        }
    }
}

/// Rank-one eigenprojector with its eigenvalue label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projector {
    pub matrix: Op2,
    pub label: Outcome,
}

/// Observable together with its spectral decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisOperator {
    pub matrix: Op2,
    pub plus: Projector,
    pub minus: Projector,
}

/// `cos(theta) sz + sin(theta) sx` with projectors for outcomes +1 and -1.
pub fn pauli_axis_operator(theta: f64) -> Result<AxisOperator> {
    let axis = MeasurementAxis::new(theta)?;
    Ok(AxisOperator {
        matrix: axis.operator(),
        plus: axis.projector(Outcome::Plus),
        minus: axis.projector(Outcome::Minus),
    })
}

/// exp(-i theta sy / 2).
pub fn rotation_y(theta: f64) -> Op2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Op2::new(re(c), re(-s), re(s), re(c))
}

pub fn rotate_y(state: &QubitState, theta: f64) -> QubitState {
    let r = rotation_y(theta);
    let rho = r * state.matrix() * r.adjoint();
    QubitState {
        rho: (rho + rho.adjoint()) * re(0.5),
    }
}

/// Bloch-vector form of [`rotate_y`].
pub fn rotate_bloch_y(b: Bloch, theta: f64) -> Bloch {
    let (s, c) = theta.sin_cos();
    Bloch::new(b.x * c + b.z * s, b.y, b.z * c - b.x * s)
}

/// Result of a projective measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveResult {
    pub outcome: Outcome,
    pub post: QubitState,
    pub probability: f64,
}

/// Probability of `outcome` along `axis`.
pub fn outcome_prob(state: &QubitState, axis: &MeasurementAxis, outcome: Outcome) -> f64 {
    let p = 0.5 * (1.0 + outcome.sign() * state.bloch().dot(&axis.direction()));
    p.clamp(0.0, 1.0)
}

/// Samples a projective measurement by inverse CDF on a single uniform draw.
pub fn projective_measure<R: Rng + ?Sized>(
    state: &QubitState,
    axis: &MeasurementAxis,
    rng: &mut R,
) -> ProjectiveResult {
    let p_plus = outcome_prob(state, axis, Outcome::Plus);
    let u: f64 = rng.random();
    let outcome = if u < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let probability = match outcome {
        Outcome::Plus => p_plus,
        Outcome::Minus => 1.0 - p_plus,
    };
    let d = axis.direction();
    let s = outcome.sign();
    ProjectiveResult {
        outcome,
        post: QubitState {
            rho: bloch_matrix(Bloch::new(s * d.x, s * d.y, s * d.z)),
        },
        probability,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFactory;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn axis_zero_is_sigma_z() {
        let a = pauli_axis_operator(0.0).unwrap();
        assert!(max_abs_diff(&a.matrix, &sigma_z()) < 1e-15);
        assert_abs_diff_eq!(a.plus.matrix[(0, 0)].re, 1.0);
        assert_abs_diff_eq!(a.minus.matrix[(1, 1)].re, 1.0);
    }

    #[test]
    fn axis_half_pi_is_sigma_x() {
        let a = pauli_axis_operator(FRAC_PI_2).unwrap();
        assert!(max_abs_diff(&a.matrix, &sigma_x()) < 1e-15);
        let v = MeasurementAxis::x().eigenvector(Outcome::Plus);
        assert_abs_diff_eq!(v[0].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[1].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn axis_quarter_pi_overlap_with_ground() {
        // Oracle: numerical eigendecomposition of the 2x2 real symmetric matrix.
        let m = pauli_axis_operator(FRAC_PI_4).unwrap().matrix.map(|c| c.re);
        let eig = nalgebra::SymmetricEigen::new(m);
        let k = if eig.eigenvalues[0] > eig.eigenvalues[1] {
            0
        } else {
            1
        };
        let overlap = eig.eigenvectors.column(k)[0].abs();
        assert_abs_diff_eq!(overlap, 0.923_879_532_511_286_7, epsilon = 1e-12);
        let v = MeasurementAxis::new(FRAC_PI_4)
            .unwrap()
            .eigenvector(Outcome::Plus);
        assert_abs_diff_eq!(v[0].re, (PI / 8.0).cos(), epsilon = 1e-15);
    }

    #[test]
    fn pi_rotation_flips_ground() {
        let s = rotate_y(&QubitState::ground(), PI);
        assert_abs_diff_eq!(s.bloch().z, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn half_pi_rotation_reaches_plus_x() {
        let b = rotate_y(&QubitState::ground(), FRAC_PI_2).bloch();
        assert!(b.max_diff(&Bloch::new(1.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn quarter_pi_rotation_matches_matrix_exponential() {
        // Oracle: exp(-i theta sy/2) by eigendecomposition of sy.
        let theta = FRAC_PI_4;
        let u = {
            let v_plus =
                nalgebra::Vector2::new(re(1.0), Complex64::new(0.0, 1.0)) / re(2f64.sqrt());
            let v_minus =
                nalgebra::Vector2::new(re(1.0), Complex64::new(0.0, -1.0)) / re(2f64.sqrt());
            let l = Complex64::new(0.0, -theta / 2.0).exp();
            v_plus * v_plus.adjoint() * l + v_minus * v_minus.adjoint() * l.conj()
        };
        assert!(max_abs_diff(&u, &rotation_y(theta)) < 1e-14);
        let b = rotate_y(&QubitState::ground(), theta).bloch();
        assert_abs_diff_eq!(b.x, 0.707_106_781_186_547_5, epsilon = 1e-12);
        assert_abs_diff_eq!(b.z, 0.707_106_781_186_547_5, epsilon = 1e-12);
        assert!(rotate_bloch_y(Bloch::new(0.0, 0.0, 1.0), theta).max_diff(&b) < 1e-12);
    }

    #[test]
    fn ground_measured_along_z() {
        let mut rng = StreamFactory::new(0).stream(0);
        let r = projective_measure(&QubitState::ground(), &MeasurementAxis::z(), &mut rng);
        assert_eq!(r.outcome, Outcome::Plus);
        assert_eq!(r.probability, 1.0);
    }

    #[test]
    fn mixed_state_is_unbiased() {
        let s = QubitState::maximally_mixed();
        for t in [0.0, 0.3, 2.0] {
            let ax = MeasurementAxis::new(t).unwrap();
            assert_abs_diff_eq!(outcome_prob(&s, &ax, Outcome::Plus), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn partial_polarisation_probability() {
        let s = QubitState::from_bloch(Bloch::new(0.0, 0.0, 0.6)).unwrap();
        assert_abs_diff_eq!(
            outcome_prob(&s, &MeasurementAxis::z(), Outcome::Plus),
            0.8,
            epsilon = 1e-15
        );
    }

    #[test]
    fn degenerate_branch_never_sampled() {
        let f = StreamFactory::new(1);
        for i in 0..1000 {
            let r = projective_measure(
                &QubitState::excited(),
                &MeasurementAxis::z(),
                &mut f.stream(i),
            );
            assert_eq!(r.outcome, Outcome::Minus);
        }
    }

    #[test]
    fn conversion_examples() {
        let (b, p) =
            purity_and_convert(&QubitState::from_bloch(Bloch::new(0.0, 0.0, 1.0)).unwrap());
        assert_eq!(b, Bloch::new(0.0, 0.0, 1.0));
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
        let (_, p) = purity_and_convert(&QubitState::maximally_mixed());
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        let s = QubitState::from_bloch(Bloch::new(0.6, 0.0, 0.8)).unwrap();
        assert_abs_diff_eq!(s.purity(), 1.0, epsilon = 1e-12);
        let ev = nalgebra::SymmetricEigen::new(s.matrix().map(|c| c.re)).eigenvalues;
        assert_abs_diff_eq!(ev.min(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_psd() {
        let m = Op2::new(re(1.2), re(0.0), re(0.0), re(-0.2));
        assert!(QubitState::from_matrix(m).is_err());
        assert!(QubitState::from_bloch(Bloch::new(0.8, 0.0, 0.8)).is_err());
        let ok = Op2::new(re(0.7), re(0.1), re(0.1), re(0.3));
        assert!(QubitState::from_matrix(ok).is_ok());
    }

    fn bloch_strategy() -> impl Strategy<Value = Bloch> {
        (0.0..1.0f64, 0.0..PI, 0.0..TAU).prop_map(|(r, th, ph)| {
            Bloch::new(
                r * th.sin() * ph.cos(),
                r * th.sin() * ph.sin(),
                r * th.cos(),
            )
        })
    }

    proptest! {
        #[test]
        fn axis_operator_squares_to_identity(theta in -20.0..20.0f64) {
            let a = pauli_axis_operator(theta).unwrap().matrix;
            prop_assert!(max_abs_diff(&(a * a), &identity()) < 1e-12);
        }

        #[test]
        fn outcome_probabilities_sum_to_one(b in bloch_strategy(), theta in 0.0..TAU) {
            let s = QubitState::from_bloch(b).unwrap();
            let ax = MeasurementAxis::new(theta).unwrap();
            let total: f64 = Outcome::BOTH
                .iter()
                .map(|&o| s.expectation(&ax.projector(o).matrix))
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rotation_is_reversible(b in bloch_strategy(), theta in -10.0..10.0f64) {
            let s = QubitState::from_bloch(b).unwrap();
            let back = rotate_y(&rotate_y(&s, theta), -theta);
            prop_assert!(back.max_deviation(&s) < 1e-12);
            prop_assert!((rotate_y(&s, theta).purity() - s.purity()).abs() < 1e-12);
        }

        #[test]
        fn projection_is_idempotent(b in bloch_strategy(), theta in 0.0..TAU, seed in 0u64..1000) {
            let f = StreamFactory::new(seed);
            let s = QubitState::from_bloch(b).unwrap();
            let ax = MeasurementAxis::new(theta).unwrap();
            let first = projective_measure(&s, &ax, &mut f.stream(0));
            let again = projective_measure(&first.post, &ax, &mut f.stream(1));
            prop_assert_eq!(first.outcome, again.outcome);
            prop_assert!((again.probability - 1.0).abs() < 1e-12);
        }

        #[test]
        fn bloch_roundtrip(b in bloch_strategy()) {
            let s = QubitState::from_bloch(b).unwrap();
            prop_assert!(s.bloch().max_diff(&b) < 1e-12);
            let again = QubitState::from_matrix(*s.matrix()).unwrap();
            prop_assert!(again.max_deviation(&s) < 1e-12);
        }
    }
}
