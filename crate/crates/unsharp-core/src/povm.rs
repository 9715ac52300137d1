//! Symmetric two-outcome unsharp measurements on a single qubit.
//!
//! The measurement pair is built from the projectors onto an axis r on the
//! Bloch sphere, P(+/-) = (I +/- r.sigma)/2, as
//!
//! ```text
//! M0 = sqrt(p0) P+ + sqrt(1 - p0) P-
//! M1 = sqrt(1 - p0) P+ + sqrt(p0) P-
//! ```
//!
//! with p0 in [0, 1/2]. p0 = 0 is a projective measurement, p0 = 1/2
//! extracts no information at all. The sharpness is `delta_p = 1 - 2 p0`.
//! Outcome `i` occurs with probability <psi|Mi'Mi|psi> and updates the
//! state to Mi|psi> renormalized.
//!
//! Basis convention: `{|g>, |e>}` with `sigma_z |g> = +|g>`, so the +z
//! projector is |g><g|.

use num_complex::ComplexFloat;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat2::{C64, Mat2};

/// Tolerance for the algebraic invariants (normalization, completeness).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Probabilities below this are treated as exactly zero when normalizing a
/// post-measurement state.
const PROB_FLOOR: f64 = 1e-150;

#[derive(Debug, Error, PartialEq)]
pub enum PovmError {
    #[error("state amplitudes must be finite")]
    NonFiniteAmplitude,
    #[error("state norm^2 is {norm_sq}, expected 1 within 1e-12")]
    NotNormalized { norm_sq: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("p0 is {0}, expected a value in [0, 0.5]")]
    InvalidP0(f64),
    #[error("polar angle is {0}, expected a finite value in [0, pi]")]
    InvalidTheta(f64),
    #[error("azimuthal angle must be finite, got {0}")]
    InvalidPhi(f64),
    #[error("measurement outcome has probability zero for this state")]
    ZeroProbabilityOutcome,
}

/// One of the two results of a symmetric measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// The `M0` branch.
    Zero,
    /// The `M1` branch.
    One,
}

impl Outcome {
    pub fn index(self) -> usize {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }

    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::Zero => Outcome::One,
            Outcome::One => Outcome::Zero,
        }
    }
}

/// A normalized pure state of one qubit, `amp_g |g> + amp_e |e>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    amp_g: C64,
    amp_e: C64,
}

impl QubitState {
    /// Build from amplitudes that are already normalized (within 1e-12).
    pub fn new(amp_g: C64, amp_e: C64) -> Result<Self, PovmError> {
        if !amp_g.re.is_finite()
            || !amp_g.im.is_finite()
            || !amp_e.re.is_finite()
            || !amp_e.im.is_finite()
        {
            return Err(PovmError::NonFiniteAmplitude);
        }
        let norm_sq = amp_g.norm_sqr() + amp_e.norm_sqr();
        if (norm_sq - 1.0).abs() > ALGEBRA_TOL {
            return Err(PovmError::NotNormalized { norm_sq });
        }
        // Renormalize exactly so rounding never accumulates across updates.
        let n = norm_sq.sqrt();
        Ok(QubitState {
            amp_g: amp_g / n,
            amp_e: amp_e / n,
        })
    }

    /// Build from any nonzero finite vector, normalizing it.
    pub fn from_unnormalized(amp_g: C64, amp_e: C64) -> Result<Self, PovmError> {
        if !amp_g.re.is_finite()
            || !amp_g.im.is_finite()
            || !amp_e.re.is_finite()
            || !amp_e.im.is_finite()
        {
            return Err(PovmError::NonFiniteAmplitude);
        }
        let norm_sq = amp_g.norm_sqr() + amp_e.norm_sqr();
        if norm_sq < PROB_FLOOR {
            return Err(PovmError::ZeroVector);
        }
        let n = norm_sq.sqrt();
        Ok(QubitState {
            amp_g: amp_g / n,
            amp_e: amp_e / n,
        })
    }

    pub fn ground() -> Self {
        QubitState {
            amp_g: C64::new(1.0, 0.0),
            amp_e: C64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        QubitState {
            amp_g: C64::new(0.0, 0.0),
            amp_e: C64::new(1.0, 0.0),
        }
    }

    /// `(|g> + |e>)/sqrt(2)`, the +1 eigenstate of sigma_x.
    pub fn plus_x() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitState { amp_g: a, amp_e: a }
    }

    pub fn minus_x() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitState {
            amp_g: a,
            amp_e: -a,
        }
    }

    /// `(|g> + i|e>)/sqrt(2)`, the +1 eigenstate of sigma_y.
    pub fn plus_y() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        QubitState {
            amp_g: C64::new(a, 0.0),
            amp_e: C64::new(0.0, a),
        }
    }

    pub fn minus_y() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        QubitState {
            amp_g: C64::new(a, 0.0),
            amp_e: C64::new(0.0, -a),
        }
    }

    /// Synthesize the state
    /// `sin(theta/2) e^{+i phi/2} |g> + cos(theta/2) e^{-i phi/2} |e>`.
    ///
    /// This is the parametrization inverted by [`bloch_angles`].
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Self {
        let half = 0.5 * theta;
        let ph = C64::from_polar(1.0, 0.5 * phi);
        QubitState {
            amp_g: ph * half.sin(),
            amp_e: ph.conj() * half.cos(),
        }
    }

    pub fn amp_g(&self) -> C64 {
        self.amp_g
    }

    pub fn amp_e(&self) -> C64 {
        self.amp_e
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.amp_g, self.amp_e]
    }

    /// <self|other>.
    pub fn inner(&self, other: &QubitState) -> C64 {
        self.amp_g.conj() * other.amp_g + self.amp_e.conj() * other.amp_e
    }

    /// Expectation values (<sigma_x>, <sigma_y>, <sigma_z>).
    pub fn bloch_vector(&self) -> [f64; 3] {
        let cross = self.amp_g.conj() * self.amp_e;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            self.amp_g.norm_sqr() - self.amp_e.norm_sqr(),
        ]
    }

}

/// Measurement axis, a unit vector on the Bloch sphere in polar form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementAxis {
    theta: f64,
    phi: f64,
}

impl MeasurementAxis {
    /// `theta` in [0, pi]; `phi` is wrapped into [0, 2 pi).
    pub fn new(theta: f64, phi: f64) -> Result<Self, PovmError> {
        if !theta.is_finite() || !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(PovmError::InvalidTheta(theta));
        }
        if !phi.is_finite() {
            return Err(PovmError::InvalidPhi(phi));
        }
        Ok(MeasurementAxis {
            theta,
            phi: phi.rem_euclid(2.0 * std::f64::consts::PI),
        })
    }

    pub fn z() -> Self {
        MeasurementAxis {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn x() -> Self {
        MeasurementAxis {
            theta: std::f64::consts::FRAC_PI_2,
            phi: 0.0,
        }
    }

    pub fn y() -> Self {
        MeasurementAxis {
            theta: std::f64::consts::FRAC_PI_2,
            phi: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Cartesian components (sin t cos p, sin t sin p, cos t).
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        [st * cp, st * sp, ct]
    }

    pub fn is_z(&self) -> bool {
        self.theta == 0.0
    }
}

/// Projectors onto the +r and -r eigenstates of r.sigma.
pub fn projectors(axis: MeasurementAxis) -> (Mat2, Mat2) {
    let [x, y, z] = axis.unit_vector();
    let r_sigma = Mat2::sigma_x()
        .scale(x.into())
        .add(&Mat2::sigma_y().scale(y.into()))
        .add(&Mat2::sigma_z().scale(z.into()));
    let half = C64::new(0.5, 0.0);
    let p_plus = Mat2::identity().add(&r_sigma).scale(half);
    let p_minus = Mat2::identity().sub(&r_sigma).scale(half);
    (p_plus, p_minus)
}

/// The symmetric measurement pair `(M0, M1)` for sharpness parameter `p0`
/// and an axis. Both operators are Hermitian and positive semidefinite and
/// satisfy `M0'M0 + M1'M1 = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricPovm {
    p0: f64,
    axis: MeasurementAxis,
    m0: Mat2,
    m1: Mat2,
    delta_p: f64,
}

impl SymmetricPovm {
    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn axis(&self) -> MeasurementAxis {
        self.axis
    }

    /// Sharpness, `1 - 2 p0`.
    pub fn delta_p(&self) -> f64 {
        self.delta_p
    }

    pub fn m0(&self) -> &Mat2 {
        &self.m0
    }

    pub fn m1(&self) -> &Mat2 {
        &self.m1
    }

    pub fn operator(&self, outcome: Outcome) -> &Mat2 {
        match outcome {
            Outcome::Zero => &self.m0,
            Outcome::One => &self.m1,
        }
    }
}

/// Construct the symmetric pair for `p0` in [0, 0.5] along `axis`.
pub fn build_symmetric_povm(p0: f64, axis: MeasurementAxis) -> Result<SymmetricPovm, PovmError> {
    if !p0.is_finite() || !(0.0..=0.5).contains(&p0) {
        return Err(PovmError::InvalidP0(p0));
    }
    let (p_plus, p_minus) = projectors(axis);
    let s0 = C64::new(p0.sqrt(), 0.0);
    let s1 = C64::new((1.0 - p0).sqrt(), 0.0);
    let m0 = p_plus.scale(s0).add(&p_minus.scale(s1));
    let m1 = p_plus.scale(s1).add(&p_minus.scale(s0));
    Ok(SymmetricPovm {
        p0,
        axis,
        m0,
        m1,
        delta_p: 1.0 - 2.0 * p0,
    })
}

/// Probability `<psi|Mi'Mi|psi>` of observing `outcome` on `state`.
pub fn outcome_probability(state: &QubitState, povm: &SymmetricPovm, outcome: Outcome) -> f64 {
    let [a, b] = povm.operator(outcome).apply(state.amplitudes());
    (a.norm_sqr() + b.norm_sqr()).clamp(0.0, 1.0)
}

/// Post-measurement state `Mi|psi>` renormalized, together with the
/// probability of that outcome. Fails if the outcome has probability zero.
pub fn apply_measurement(
    state: &QubitState,
    povm: &SymmetricPovm,
    outcome: Outcome,
) -> Result<(QubitState, f64), PovmError> {
    let [a, b] = povm.operator(outcome).apply(state.amplitudes());
    let prob = a.norm_sqr() + b.norm_sqr();
    if prob < PROB_FLOOR {
        return Err(PovmError::ZeroProbabilityOutcome);
    }
    let n = prob.sqrt();
    Ok((
        QubitState {
            amp_g: a / n,
            amp_e: b / n,
        },
        prob.clamp(0.0, 1.0),
    ))
}

/// Draw an outcome with the Born-rule distribution.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &QubitState,
    povm: &SymmetricPovm,
    rng: &mut R,
) -> Outcome {
    let p0 = outcome_probability(state, povm, Outcome::Zero);
    if rng.random::<f64>() < p0 {
        Outcome::Zero
    } else {
        Outcome::One
    }
}

/// Recover `(theta, phi)` such that [`QubitState::from_bloch_angles`]
/// reproduces `state` up to a global phase. `phi` is reported in
/// [0, 2 pi) and fixed to 0 at the poles, where it is degenerate.
pub fn bloch_angles(state: &QubitState) -> (f64, f64) {
    let mg = state.amp_g.norm();
    let me = state.amp_e.norm();
    let theta = 2.0 * mg.atan2(me);
    if mg * me < 1e-15 {
        return (theta, 0.0);
    }
    let phi = (state.amp_g * state.amp_e.conj())
        .arg()
        .rem_euclid(2.0 * std::f64::consts::PI);
    (theta, phi)
}

/// `|<a|b>|^2`, symmetric and invariant under global phases.
pub fn fidelity(a: &QubitState, b: &QubitState) -> f64 {
    a.inner(b).norm_sqr().clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn projectors_z_axis() {
        let (pp, pm) = projectors(MeasurementAxis::z());
        assert!(pp.max_abs_diff(&Mat2::from_real(1.0, 0.0, 0.0, 0.0)) < 1e-15);
        assert!(pm.max_abs_diff(&Mat2::from_real(0.0, 0.0, 0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn projectors_x_axis() {
        let (pp, _) = projectors(MeasurementAxis::x());
        assert!(pp.max_abs_diff(&Mat2::from_real(0.5, 0.5, 0.5, 0.5)) < 1e-15);
    }

    #[test]
    fn projectors_tilted_axis() {
        let axis = MeasurementAxis::new(std::f64::consts::FRAC_PI_4, std::f64::consts::PI / 3.0)
            .unwrap();
        let (pp, pm) = projectors(axis);
        assert!((pp.0[0][0].re - 0.85355339059327373).abs() < 1e-15);
        // idempotent, Hermitian, orthogonal, complete
        assert!(pp.mul(&pp).max_abs_diff(&pp) < 1e-15);
        assert!(pp.is_hermitian(1e-15));
        assert!(pp.mul(&pm).max_abs_diff(&Mat2::zero()) < 1e-15);
        assert!(pp.add(&pm).max_abs_diff(&Mat2::identity()) < 1e-15);
    }

    #[test]
    fn build_weak_limit_is_identity_channel() {
        let povm = build_symmetric_povm(0.5, MeasurementAxis::x()).unwrap();
        let half_sqrt = Mat2::identity().scale(c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert!(povm.m0().max_abs_diff(&half_sqrt) < 1e-15);
        assert!(povm.m1().max_abs_diff(&half_sqrt) < 1e-15);
        assert_eq!(povm.delta_p(), 0.0);
    }

    #[test]
    fn build_projective_limit() {
        let povm = build_symmetric_povm(0.0, MeasurementAxis::z()).unwrap();
        let (pp, pm) = projectors(MeasurementAxis::z());
        assert!(povm.m0().max_abs_diff(&pm) < 1e-15);
        assert!(povm.m1().max_abs_diff(&pp) < 1e-15);
        assert_eq!(povm.delta_p(), 1.0);
    }

    #[test]
    fn build_z_axis_simulation_value() {
        let povm = build_symmetric_povm(0.45, MeasurementAxis::z()).unwrap();
        assert!((povm.delta_p() - 0.1).abs() < 1e-15);
        assert!((povm.m0().0[0][0].re - 0.67082039324993692).abs() < 1e-15);
        assert!((povm.m0().0[1][1].re - 0.74161984870956632).abs() < 1e-15);
        assert!(povm.m0().0[0][1].norm() < 1e-15);
    }

    #[test]
    fn build_general_axis_matches_pauli_expansion() {
        // (1/2)(p+ I + p- r.sigma) evaluated independently at
        // p0 = 0.3, theta = 1.1, phi = 2.2
        let axis = MeasurementAxis::new(1.1, 2.2).unwrap();
        let povm = build_symmetric_povm(0.3, axis).unwrap();
        let m0 = Mat2::new(
            c(0.62666083437660269, 0.0),
            c(0.075770460153011476, 0.10409520518018837),
            c(0.075770460153011476, -0.10409520518018837),
            c(0.75772174966263894, 0.0),
        );
        let m1 = Mat2::new(
            c(0.75772174966263894, 0.0),
            c(-0.075770460153011476, -0.10409520518018837),
            c(-0.075770460153011476, 0.10409520518018837),
            c(0.62666083437660269, 0.0),
        );
        assert!(povm.m0().max_abs_diff(&m0) < 1e-15);
        assert!(povm.m1().max_abs_diff(&m1) < 1e-15);
    }

    #[test]
    fn rejects_bad_p0() {
        assert!(build_symmetric_povm(0.7, MeasurementAxis::z()).is_err());
        assert!(build_symmetric_povm(-0.1, MeasurementAxis::z()).is_err());
        assert!(build_symmetric_povm(f64::NAN, MeasurementAxis::z()).is_err());
    }

    #[test]
    fn probability_eigenstate() {
        let povm = build_symmetric_povm(0.45, MeasurementAxis::z()).unwrap();
        let p = outcome_probability(&QubitState::ground(), &povm, Outcome::Zero);
        assert!((p - 0.45).abs() < 1e-15);
    }

    #[test]
    fn probability_balanced_superposition() {
        for p0 in [0.0, 0.15, 0.3, 0.5] {
            let povm = build_symmetric_povm(p0, MeasurementAxis::z()).unwrap();
            let p = outcome_probability(&QubitState::plus_x(), &povm, Outcome::Zero);
            assert!((p - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn probability_weighted_superposition() {
        let state = QubitState::new(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let povm = build_symmetric_povm(0.15, MeasurementAxis::z()).unwrap();
        let p = outcome_probability(&state, &povm, Outcome::Zero);
        assert!((p - 0.598).abs() < 1e-14);
        let q = outcome_probability(&state, &povm, Outcome::One);
        assert!((p + q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn update_balanced_superposition() {
        let povm = build_symmetric_povm(0.45, MeasurementAxis::z()).unwrap();
        let (post, prob) = apply_measurement(&QubitState::plus_x(), &povm, Outcome::Zero).unwrap();
        assert!((prob - 0.5).abs() < 1e-14);
        assert!((post.amp_g().re - 0.67082039324993692).abs() < 1e-14);
        assert!((post.amp_e().re - 0.74161984870956632).abs() < 1e-14);
    }

    #[test]
    fn update_eigenstate_is_fixed_point() {
        let povm = build_symmetric_povm(0.3, MeasurementAxis::z()).unwrap();
        let (post, prob) = apply_measurement(&QubitState::ground(), &povm, Outcome::One).unwrap();
        assert!((prob - 0.7).abs() < 1e-14);
        assert!(fidelity(&post, &QubitState::ground()) > 1.0 - 1e-14);
    }

    #[test]
    fn update_weighted_superposition() {
        let state = QubitState::new(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let povm = build_symmetric_povm(0.15, MeasurementAxis::z()).unwrap();
        let (post, prob) = apply_measurement(&state, &povm, Outcome::Zero).unwrap();
        assert!((prob - 0.598).abs() < 1e-14);
        assert!((post.amp_g().re - 0.30050125348238).abs() < 1e-13);
        assert!((post.amp_e().re - 0.95378141974748).abs() < 1e-13);
    }

    #[test]
    fn update_zero_probability_errors() {
        let povm = build_symmetric_povm(0.0, MeasurementAxis::z()).unwrap();
        // M0 = |e><e| at p0 = 0, so outcome 0 on |g> is impossible
        let err = apply_measurement(&QubitState::ground(), &povm, Outcome::Zero).unwrap_err();
        assert_eq!(err, PovmError::ZeroProbabilityOutcome);
    }

    #[test]
    fn sampling_respects_probabilities() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let povm = build_symmetric_povm(0.45, MeasurementAxis::z()).unwrap();
        let n = 100_000;
        let mut zeros = 0usize;
        for _ in 0..n {
            if sample_outcome(&QubitState::ground(), &povm, &mut rng) == Outcome::Zero {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.45).abs() < 0.005, "freq {freq}");

        // projective on an eigenstate never yields the orthogonal branch
        let proj = build_symmetric_povm(0.0, MeasurementAxis::z()).unwrap();
        for _ in 0..100 {
            assert_eq!(
                sample_outcome(&QubitState::ground(), &proj, &mut rng),
                Outcome::One
            );
        }
    }

    #[test]
    fn bloch_angles_poles_and_equator() {
        let (theta, phi) = bloch_angles(&QubitState::excited());
        assert!(theta.abs() < 1e-12 && phi == 0.0);
        let (theta, phi) = bloch_angles(&QubitState::plus_x());
        assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(phi.abs() < 1e-12);
    }

    #[test]
    fn bloch_angles_round_trip() {
        let state = QubitState::from_bloch_angles(
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_2,
        );
        let (theta, phi) = bloch_angles(&state);
        assert!((theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((phi - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn fidelity_basics() {
        let a = QubitState::plus_x();
        assert!((fidelity(&a, &a) - 1.0).abs() < 1e-15);
        assert!(fidelity(&QubitState::ground(), &QubitState::excited()) < 1e-15);
        assert!((fidelity(&a, &QubitState::ground()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn axis_wraps_phi() {
        let axis = MeasurementAxis::new(1.0, -0.5).unwrap();
        assert!((axis.phi() - (2.0 * std::f64::consts::PI - 0.5)).abs() < 1e-12);
        assert!(MeasurementAxis::new(-0.1, 0.0).is_err());
        assert!(MeasurementAxis::new(3.2, 0.0).is_err());
    }
}
