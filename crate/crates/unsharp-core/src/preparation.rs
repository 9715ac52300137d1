//! Steering a qubit to a target state using nothing but measurements.
//!
//! The protocol starts from the fixed fiducial state `(|g> + |e>)/sqrt 2`
//! and runs two stages of weak measurements along fixed axes. The phase
//! stage measures along y until the azimuthal angle of the tracked state
//! is within `tol_phi` of the target, then the polar stage measures
//! along z until the polar angle is within `tol_theta`. Decisions use
//! the tracked state, which is conditioned on reported outcomes; error
//! channels act on the true state, so the two can diverge.
//!
//! When a stage wanders the wrong way, the angular distance to target
//! exceeding its stage-entry value by more than `guard_factor` times the
//! stage tolerance, the qubit is reset to the fiducial state with strong
//! projective measurements and the phase stage restarts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{SweepPoint, SweepVariable, TrajectoryStep, mean_and_stderr};
use crate::noise::{NoiseConfig, flip_outcome, spontaneous_collapse};
use crate::povm::{
    MeasurementAxis, PovmError, QubitState, apply_measurement, bloch_angles,
    build_symmetric_povm, fidelity, sample_outcome,
};
use crate::seed::trajectory_rng;

#[derive(Debug, Error)]
pub enum PreparationError {
    #[error("invalid preparation config: {0}")]
    Config(String),
    #[error("projective reset did not land on the fiducial state within {0} measurements")]
    ResetStalled(usize),
    #[error(transparent)]
    Povm(#[from] PovmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationConfig {
    /// Target polar angle, radians in [0, pi].
    pub theta_target: f64,
    /// Target azimuthal angle, radians.
    pub phi_target: f64,
    /// Measurement strength parameter, in [0, 0.5].
    pub p0: f64,
    pub tol_phi: f64,
    pub tol_theta: f64,
    /// Give up (flag non-convergence, not an error) past this many
    /// measurements, resets included.
    pub max_measurements: usize,
    /// Wrong-direction guard band in units of the stage tolerance.
    pub guard_factor: f64,
    /// Whether the sweep count column includes reset measurements. Both
    /// counts are always recorded on the trajectory.
    pub count_resets: bool,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Mapping-error and spontaneous-emission channels apply per stage
    /// measurement. Dephasing is ignored: the protocol has no free
    /// evolution between measurements.
    pub noise: NoiseConfig,
}

impl Default for PreparationConfig {
    fn default() -> Self {
        PreparationConfig {
            theta_target: std::f64::consts::FRAC_PI_4,
            phi_target: std::f64::consts::FRAC_PI_2,
            p0: 0.15,
            tol_phi: 0.05,
            tol_theta: 0.05,
            max_measurements: 500,
            guard_factor: 2.0,
            count_resets: true,
            n_trajectories: 1000,
            seed: 123_456_789,
            noise: NoiseConfig::default(),
        }
    }
}

impl PreparationConfig {
    pub fn validate(&self) -> Result<(), PreparationError> {
        let err = |m: String| Err(PreparationError::Config(m));
        if !self.theta_target.is_finite() || !(0.0..=std::f64::consts::PI).contains(&self.theta_target) {
            return err(format!("theta_target = {} outside [0, pi]", self.theta_target));
        }
        if !self.phi_target.is_finite() {
            return err("phi_target must be finite".into());
        }
        if !self.p0.is_finite() || !(0.0..=0.5).contains(&self.p0) {
            return err(format!("p0 = {} outside [0, 0.5]", self.p0));
        }
        for (name, tol) in [("tol_phi", self.tol_phi), ("tol_theta", self.tol_theta)] {
            if !tol.is_finite() || tol <= 0.0 || tol >= std::f64::consts::PI {
                return err(format!("{name} = {tol} outside (0, pi)"));
            }
        }
        if self.max_measurements == 0 || self.n_trajectories == 0 {
            return err("max_measurements and n_trajectories must be at least 1".into());
        }
        if !self.guard_factor.is_finite() || self.guard_factor < 0.0 {
            return err(format!("guard_factor = {} must be non-negative", self.guard_factor));
        }
        if !(0.0..=1.0).contains(&self.noise.p_wrong) {
            return err(format!("p_wrong = {} outside [0, 1]", self.noise.p_wrong));
        }
        if !(0.0..=1.0).contains(&self.noise.p_spont) {
            return err(format!("p_spont = {} outside [0, 1]", self.noise.p_spont));
        }
        Ok(())
    }

    pub fn target_state(&self) -> QubitState {
        QubitState::from_bloch_angles(self.theta_target, self.phi_target)
    }
}

/// Distance between two angles on the circle, in [0, pi].
fn wrap_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI { 2.0 * std::f64::consts::PI - d } else { d }
}

/// Iteration cap for the projective reset; hitting it means the RNG or
/// the state is pathological.
const RESET_CAP: usize = 1000;

/// Drive the state back to the fiducial state `(|g> + |e>)/sqrt 2` with
/// strong projective measurements, alternating the x and y axes
/// starting with x, until a landing coincides with it. Returns the
/// reset state and the number of measurements spent.
///
/// The fiducial state is an x eigenstate, so an input already there
/// costs exactly one confirming measurement. Once a y landing has
/// scrambled the state, each x measurement succeeds with probability
/// one half.
pub fn reset_to_psi0<R: rand::Rng + ?Sized>(
    state: &QubitState,
    rng: &mut R,
) -> Result<(QubitState, usize), PreparationError> {
    let psi0 = QubitState::plus_x();
    let proj_x = build_symmetric_povm(0.0, MeasurementAxis::x())?;
    let proj_y = build_symmetric_povm(0.0, MeasurementAxis::y())?;
    let mut current = *state;
    for step in 0..RESET_CAP {
        let povm = if step % 2 == 0 { &proj_x } else { &proj_y };
        let outcome = sample_outcome(&current, povm, rng);
        current = apply_measurement(&current, povm, outcome)?.0;
        if fidelity(&current, &psi0) > 1.0 - 1e-9 {
            return Ok((current, step + 1));
        }
    }
    Err(PreparationError::ResetStalled(RESET_CAP))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Phase,
    Polar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreparationRecord {
    /// One entry per stage measurement; reset measurements only appear
    /// in the counts. `estimate_state` holds the tracked state and
    /// `fidelity` compares the true state against the target.
    pub steps: Vec<TrajectoryStep>,
    /// Squared overlap of the final true state with the target.
    pub final_fidelity: f64,
    /// All physical measurements, resets included.
    pub total_count: usize,
    /// Stage measurements only.
    pub povm_count: usize,
    pub resets: usize,
    pub converged: bool,
}

impl PreparationRecord {
    pub fn reported_count(&self, count_resets: bool) -> usize {
        if count_resets { self.total_count } else { self.povm_count }
    }
}

/// Run one seeded preparation trajectory.
pub fn run_preparation<R: rand::Rng + ?Sized>(
    cfg: &PreparationConfig,
    rng: &mut R,
) -> Result<PreparationRecord, PreparationError> {
    cfg.validate()?;
    let povm_y = build_symmetric_povm(cfg.p0, MeasurementAxis::y())?;
    let povm_z = build_symmetric_povm(cfg.p0, MeasurementAxis::z())?;
    let target = cfg.target_state();

    let mut true_state = QubitState::plus_x();
    let mut tracked = true_state;
    let (mut th, mut ph) = bloch_angles(&tracked);
    let mut stage = Stage::Phase;
    let mut d_entry = wrap_dist(ph, cfg.phi_target);
    let mut steps = Vec::new();
    let mut total = 0usize;
    let mut povm_only = 0usize;
    let mut resets = 0usize;
    let mut converged = false;

    while total < cfg.max_measurements {
        // a stage whose tolerance is already met at entry needs no
        // measurement; this only fires for targets at the stage angles
        // of the fiducial state and otherwise leaves the walk untouched
        if stage == Stage::Phase && wrap_dist(ph, cfg.phi_target) <= cfg.tol_phi {
            stage = Stage::Polar;
            d_entry = (th - cfg.theta_target).abs();
        }
        if stage == Stage::Polar && (th - cfg.theta_target).abs() <= cfg.tol_theta {
            converged = true;
            break;
        }

        let povm = match stage {
            Stage::Phase => &povm_y,
            Stage::Polar => &povm_z,
        };
        let (collapsed_state, collapse) =
            spontaneous_collapse(&true_state, cfg.noise.p_spont, rng);
        true_state = collapsed_state;
        let outcome = sample_outcome(&true_state, povm, rng);
        true_state = apply_measurement(&true_state, povm, outcome)?.0;
        let reported = flip_outcome(outcome, cfg.noise.p_wrong, rng);
        match apply_measurement(&tracked, povm, reported) {
            Ok((next, _)) => tracked = next,
            // an impossible reported outcome (only at p0 = 0) is dropped
            Err(PovmError::ZeroProbabilityOutcome) => {}
            Err(e) => return Err(e.into()),
        }
        total += 1;
        povm_only += 1;
        (th, ph) = bloch_angles(&tracked);
        steps.push(TrajectoryStep {
            time: total as f64,
            true_state,
            estimate_state: tracked,
            outcome,
            reported_outcome: reported,
            collapse,
            fidelity: fidelity(&true_state, &target),
        });

        let (dist, tol) = match stage {
            Stage::Phase => (wrap_dist(ph, cfg.phi_target), cfg.tol_phi),
            Stage::Polar => ((th - cfg.theta_target).abs(), cfg.tol_theta),
        };
        if stage == Stage::Phase && dist <= tol {
            stage = Stage::Polar;
            d_entry = (th - cfg.theta_target).abs();
            continue;
        }
        if stage == Stage::Polar && dist <= tol {
            converged = true;
            break;
        }
        if dist > d_entry + cfg.guard_factor * tol {
            let (reset_state, reset_steps) = reset_to_psi0(&true_state, rng)?;
            true_state = reset_state;
            total += reset_steps;
            resets += 1;
            tracked = QubitState::plus_x();
            (th, ph) = bloch_angles(&tracked);
            stage = Stage::Phase;
            d_entry = wrap_dist(ph, cfg.phi_target);
        }
    }

    Ok(PreparationRecord {
        steps,
        final_fidelity: fidelity(&true_state, &target),
        total_count: total,
        povm_count: povm_only,
        resets,
        converged,
    })
}

/// Run `cfg.n_trajectories` preparations at every grid value of the
/// chosen error probability. Returns the fidelity curve and the count
/// curve in one row per grid point; the count column follows
/// `cfg.count_resets`. Deterministic for a fixed seed regardless of
/// thread count.
pub fn sweep_preparation(
    cfg: &PreparationConfig,
    variable: SweepVariable,
    grid: &[f64],
) -> Result<Vec<SweepPoint>, PreparationError> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(PreparationError::Config("sweep grid is empty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (sweep_idx, &value) in grid.iter().enumerate() {
        let mut point_cfg = *cfg;
        match variable {
            SweepVariable::MappingError => point_cfg.noise.p_wrong = value,
            SweepVariable::SpontaneousEmission => point_cfg.noise.p_spont = value,
        }
        point_cfg.validate()?;
        let results: Result<Vec<(f64, f64)>, PreparationError> = (0..cfg.n_trajectories)
            .into_par_iter()
            .map(|traj| {
                let mut rng = trajectory_rng(cfg.seed, sweep_idx as u64, traj as u64);
                let record = run_preparation(&point_cfg, &mut rng)?;
                Ok((
                    record.final_fidelity,
                    record.reported_count(cfg.count_resets) as f64,
                ))
            })
            .collect();
        let results = results?;
        let fids: Vec<f64> = results.iter().map(|r| r.0).collect();
        let counts: Vec<f64> = results.iter().map(|r| r.1).collect();
        let (mean_fidelity, stderr_fidelity) = mean_and_stderr(&fids);
        let (mean_count, stderr_count) = mean_and_stderr(&counts);
        points.push(SweepPoint {
            grid_value: value,
            mean_fidelity,
            stderr_fidelity,
            mean_count,
            stderr_count,
            n_traj: cfg.n_trajectories,
            seed: cfg.seed,
        });
    }
    Ok(points)
}
