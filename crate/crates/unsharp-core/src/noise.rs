//! Error channels applied to simulated measurement runs.
//!
//! Three mechanisms, each independently switchable:
//!
//! - magnetic-field dephasing: a random detuning `beta ~ N(0, delta_beta)`
//!   enters the drive Hamiltonian `(rabi/2) sigma_x + beta sigma_z`; a
//!   fresh value is drawn per integration step, so a single step over an
//!   interval models quasi-static noise while many short steps approach
//!   the white-noise limit,
//! - outcome mapping errors: the classical record of a measurement flips
//!   with probability `p_wrong`, the quantum backaction stays correct,
//! - spontaneous emission: with some probability per epoch the target
//!   scatters a photon and collapses onto `|g>` or `|e>` with equal
//!   weight.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::mat2::C64;
use crate::povm::{Outcome, QubitState};

/// Quasi-static field noise strength, parametrized by the Ramsey
/// coherence time it produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingConfig {
    /// Time at which the ensemble Ramsey contrast drops to 1/e.
    pub tau_ramsey: f64,
}

impl DephasingConfig {
    pub fn delta_beta(&self) -> f64 {
        delta_beta_from_ramsey(self.tau_ramsey)
    }
}

/// Classical readout record error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingErrorConfig {
    /// Probability that a recorded outcome is the flip of the true one.
    pub p_wrong: f64,
}

/// Photon-scattering collapse events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpontaneousEmissionConfig {
    /// Probability of a collapse event per measurement epoch.
    pub p_event: f64,
}

/// All channels together; `Default` turns everything off.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub dephasing: Option<DephasingConfig>,
    pub p_wrong: f64,
    pub p_spont: f64,
}

impl NoiseConfig {
    pub fn delta_beta(&self) -> f64 {
        self.dephasing.map(|d| d.delta_beta()).unwrap_or(0.0)
    }
}

/// Standard deviation of the field detuning that gives Ramsey time
/// `tau_ramsey`: `1 / (sqrt(2) tau_ramsey)`.
pub fn delta_beta_from_ramsey(tau_ramsey: f64) -> f64 {
    assert!(
        tau_ramsey.is_finite() && tau_ramsey > 0.0,
        "Ramsey time must be positive, got {tau_ramsey}"
    );
    1.0 / (std::f64::consts::SQRT_2 * tau_ramsey)
}

/// Ensemble Ramsey contrast after free evolution for time `t` under
/// quasi-static Gaussian detuning noise: `exp(-(t / tau_ramsey)^2)`.
///
/// This is the average of `exp(-2 i beta t)` over
/// `beta ~ N(0, delta_beta)` with `delta_beta` as above.
pub fn ramsey_coherence(t: f64, tau_ramsey: f64) -> f64 {
    let db = delta_beta_from_ramsey(tau_ramsey);
    (-2.0 * db * db * t * t).exp()
}

/// Exact single-qubit propagation under `(rabi/2) sigma_x + beta sigma_z`
/// for time `dt`.
fn propagate(state: &QubitState, rabi: f64, beta: f64, dt: f64) -> QubitState {
    let a = 0.5 * rabi;
    let w = a.hypot(beta);
    let (cos_wt, sinc) = if w * dt == 0.0 {
        (1.0, dt)
    } else {
        ((w * dt).cos(), (w * dt).sin() / w)
    };
    let i = C64::new(0.0, 1.0);
    let g = state.amp_g();
    let e = state.amp_e();
    let new_g = cos_wt * g - i * sinc * (beta * g + a * e);
    let new_e = cos_wt * e - i * sinc * (a * g - beta * e);
    QubitState::from_unnormalized(new_g, new_e).expect("unitary step preserves the norm")
}

/// Drive the qubit for `duration` in `n_steps` equal pieces, drawing an
/// independent detuning for each piece. With `delta_beta = 0` this is the
/// exact noiseless evolution regardless of step count.
pub fn evolve_with_dephasing<R: Rng + ?Sized>(
    state: &QubitState,
    rabi: f64,
    duration: f64,
    n_steps: usize,
    delta_beta: f64,
    rng: &mut R,
) -> QubitState {
    assert!(n_steps > 0, "need at least one integration step");
    let dt = duration / n_steps as f64;
    let mut out = *state;
    if delta_beta == 0.0 {
        for _ in 0..n_steps {
            out = propagate(&out, rabi, 0.0, dt);
        }
        return out;
    }
    let noise = Normal::new(0.0, delta_beta).expect("finite nonnegative spread");
    for _ in 0..n_steps {
        let beta = noise.sample(rng);
        out = propagate(&out, rabi, beta, dt);
    }
    out
}

/// Noiseless drive for `duration`, the propagation an estimator that
/// knows the Hamiltonian but not the noise would apply.
pub fn evolve_ideal(state: &QubitState, rabi: f64, duration: f64) -> QubitState {
    propagate(state, rabi, 0.0, duration)
}

/// Flip the recorded outcome with probability `p_wrong`. Consumes one
/// uniform draw whenever `p_wrong > 0`.
pub fn flip_outcome<R: Rng + ?Sized>(outcome: Outcome, p_wrong: f64, rng: &mut R) -> Outcome {
    assert!((0.0..=1.0).contains(&p_wrong), "p_wrong out of [0, 1]");
    if p_wrong > 0.0 && rng.random::<f64>() < p_wrong {
        outcome.flipped()
    } else {
        outcome
    }
}

/// With probability `p_event`, collapse the state onto `|g>` or `|e>`
/// with equal weight and report that a collapse happened.
///
/// Draw discipline, fixed for replay stability: no draw when
/// `p_event = 0`; one uniform draw to decide the event; a second draw for
/// the collapse direction only when the event fires.
pub fn spontaneous_collapse<R: Rng + ?Sized>(
    state: &QubitState,
    p_event: f64,
    rng: &mut R,
) -> (QubitState, bool) {
    assert!((0.0..=1.0).contains(&p_event), "p_event out of [0, 1]");
    if p_event <= 0.0 || rng.random::<f64>() >= p_event {
        return (*state, false);
    }
    let collapsed = if rng.random::<f64>() < 0.5 {
        QubitState::ground()
    } else {
        QubitState::excited()
    };
    (collapsed, true)
}
