//! Tracking a driven qubit in real time from a stream of weak
//! measurement outcomes.
//!
//! One trajectory holds two states. The true state starts in `|g>` and
//! evolves under the Rabi drive plus whichever error channels are
//! enabled. The estimate evolves under the noiseless drive only and is
//! updated with the measurement operator of each reported outcome. The
//! figure of merit is the squared overlap between the two, time-averaged
//! after an initial transient.
//!
//! Per epoch, in order: the true state evolves (with dephasing if
//! configured), the estimate evolves noiselessly, an optional
//! spontaneous collapse hits the true state, an outcome is sampled from
//! the true state and applied to it, the recorded outcome (flipped with
//! probability `p_wrong`) is applied to the estimate, and the fidelity
//! is logged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{NoiseConfig, evolve_ideal, evolve_with_dephasing, flip_outcome, spontaneous_collapse};
use crate::povm::{
    Outcome, PovmError, QubitState, apply_measurement, build_symmetric_povm, fidelity,
    sample_outcome,
};
use crate::seed::trajectory_rng;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("invalid estimation config: {0}")]
    Config(String),
    #[error(transparent)]
    Povm(#[from] PovmError),
}

/// Initial state handed to the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorInit {
    /// Start the estimate on the true initial state. With the weak
    /// default sharpness the filter locks immediately, so the noiseless
    /// baseline fidelity is 1.
    KnownInitial,
    /// Start the estimate on `|+x>`, the maximally uncertain choice for
    /// a z measurement. At sharpness 0.1 the filter needs several
    /// hundred measurements to lock, which dominates short runs.
    PlusX,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Measurement strength parameter, in [0, 0.5].
    pub p0: f64,
    /// Measurement epochs per Rabi period.
    pub measurements_per_period: usize,
    /// Rabi period, s; the drive frequency is `2 pi / rabi_period`.
    pub rabi_period: f64,
    pub noise: NoiseConfig,
    pub n_trajectories: usize,
    pub duration_periods: usize,
    /// Periods dropped from the front before averaging fidelity.
    pub transient_skip_periods: usize,
    /// Integration steps per epoch when dephasing is enabled.
    pub substeps_per_epoch: usize,
    pub estimator_init: EstimatorInit,
    pub seed: u64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            p0: 0.45,
            measurements_per_period: 10,
            rabi_period: 0.1,
            noise: NoiseConfig::default(),
            n_trajectories: 1000,
            duration_periods: 30,
            transient_skip_periods: 3,
            substeps_per_epoch: 10,
            estimator_init: EstimatorInit::KnownInitial,
            seed: 123_456_789,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<(), EstimationError> {
        let err = |m: String| Err(EstimationError::Config(m));
        if !self.p0.is_finite() || !(0.0..=0.5).contains(&self.p0) {
            return err(format!("p0 = {} outside [0, 0.5]", self.p0));
        }
        if !self.rabi_period.is_finite() || self.rabi_period <= 0.0 {
            return err(format!("rabi_period = {} must be positive", self.rabi_period));
        }
        if self.measurements_per_period == 0 {
            return err("measurements_per_period must be at least 1".into());
        }
        if self.duration_periods == 0 || self.n_trajectories == 0 {
            return err("duration_periods and n_trajectories must be at least 1".into());
        }
        if self.transient_skip_periods >= self.duration_periods {
            return err(format!(
                "transient skip ({}) must be shorter than the run ({} periods)",
                self.transient_skip_periods, self.duration_periods
            ));
        }
        if self.substeps_per_epoch == 0 {
            return err("substeps_per_epoch must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.noise.p_wrong) {
            return err(format!("p_wrong = {} outside [0, 1]", self.noise.p_wrong));
        }
        if !(0.0..=1.0).contains(&self.noise.p_spont) {
            return err(format!("p_spont = {} outside [0, 1]", self.noise.p_spont));
        }
        if let Some(d) = self.noise.dephasing {
            if !d.tau_ramsey.is_finite() || d.tau_ramsey <= 0.0 {
                return err(format!("tau_ramsey = {} must be positive", d.tau_ramsey));
            }
        }
        Ok(())
    }

    pub fn rabi_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.rabi_period
    }

    pub fn epoch_spacing(&self) -> f64 {
        self.rabi_period / self.measurements_per_period as f64
    }

    fn total_epochs(&self) -> usize {
        self.duration_periods * self.measurements_per_period
    }

    fn skip_epochs(&self) -> usize {
        self.transient_skip_periods * self.measurements_per_period
    }
}

/// One epoch of a recorded trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryStep {
    pub time: f64,
    pub true_state: QubitState,
    pub estimate_state: QubitState,
    pub outcome: Outcome,
    pub reported_outcome: Outcome,
    pub collapse: bool,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub steps: Vec<TrajectoryStep>,
    /// Fidelity averaged over the epochs after the transient skip.
    pub mean_fidelity: f64,
    pub measurement_count: usize,
}

/// Run one seeded trajectory and record every epoch.
pub fn run_estimation_trajectory<R: rand::Rng + ?Sized>(
    cfg: &EstimationConfig,
    rng: &mut R,
) -> Result<TrajectoryRecord, EstimationError> {
    cfg.validate()?;
    let povm = build_symmetric_povm(cfg.p0, crate::povm::MeasurementAxis::z())?;
    let omega = cfg.rabi_frequency();
    let dt = cfg.epoch_spacing();
    let delta_beta = cfg.noise.delta_beta();
    let substeps = if delta_beta > 0.0 { cfg.substeps_per_epoch } else { 1 };

    let mut true_state = QubitState::ground();
    let mut estimate = match cfg.estimator_init {
        EstimatorInit::KnownInitial => true_state,
        EstimatorInit::PlusX => QubitState::plus_x(),
    };

    let total = cfg.total_epochs();
    let skip = cfg.skip_epochs();
    let mut steps = Vec::with_capacity(total);
    let mut fid_sum = 0.0;
    for epoch in 0..total {
        true_state = evolve_with_dephasing(&true_state, omega, dt, substeps, delta_beta, rng);
        estimate = evolve_ideal(&estimate, omega, dt);
        let (collapsed_state, collapse) =
            spontaneous_collapse(&true_state, cfg.noise.p_spont, rng);
        true_state = collapsed_state;
        let outcome = sample_outcome(&true_state, &povm, rng);
        let (next_true, _) = apply_measurement(&true_state, &povm, outcome)?;
        true_state = next_true;
        let reported = flip_outcome(outcome, cfg.noise.p_wrong, rng);
        match apply_measurement(&estimate, &povm, reported) {
            Ok((next_est, _)) => estimate = next_est,
            // the reported outcome can be impossible for the estimate
            // only at p0 = 0; the inconsistent observation is dropped
            Err(PovmError::ZeroProbabilityOutcome) => {}
            Err(e) => return Err(e.into()),
        }
        let fid = fidelity(&true_state, &estimate);
        if epoch >= skip {
            fid_sum += fid;
        }
        steps.push(TrajectoryStep {
            time: (epoch + 1) as f64 * dt,
            true_state,
            estimate_state: estimate,
            outcome,
            reported_outcome: reported,
            collapse,
            fidelity: fid,
        });
    }
    Ok(TrajectoryRecord {
        steps,
        mean_fidelity: fid_sum / (total - skip) as f64,
        measurement_count: total,
    })
}

/// Which error probability a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    MappingError,
    SpontaneousEmission,
}

/// Aggregated result at one grid value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub grid_value: f64,
    pub mean_fidelity: f64,
    pub stderr_fidelity: f64,
    pub mean_count: f64,
    pub stderr_count: f64,
    pub n_traj: usize,
    pub seed: u64,
}

pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Run `cfg.n_trajectories` independent trajectories at every grid value
/// of the chosen error probability. Trajectories are distributed over
/// the rayon pool; each draws its RNG from (seed, grid index, trajectory
/// index), so the output does not depend on thread count.
pub fn sweep_estimation(
    cfg: &EstimationConfig,
    variable: SweepVariable,
    grid: &[f64],
) -> Result<Vec<SweepPoint>, EstimationError> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(EstimationError::Config("sweep grid is empty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (sweep_idx, &value) in grid.iter().enumerate() {
        let mut point_cfg = *cfg;
        match variable {
            SweepVariable::MappingError => point_cfg.noise.p_wrong = value,
            SweepVariable::SpontaneousEmission => point_cfg.noise.p_spont = value,
        }
        point_cfg.validate()?;
        let results: Result<Vec<(f64, f64)>, EstimationError> = (0..cfg.n_trajectories)
            .into_par_iter()
            .map(|traj| {
                let mut rng = trajectory_rng(cfg.seed, sweep_idx as u64, traj as u64);
                let record = run_estimation_trajectory(&point_cfg, &mut rng)?;
                Ok((record.mean_fidelity, record.measurement_count as f64))
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

/// The separation of timescales the tracking protocol relies on:
/// measurement duration << Rabi period << measurement collapse time <<
/// noise coherence time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimescaleReport {
    /// Duration of one measurement; pulses are instantaneous in this
    /// model, so this is 0 and its inequality holds trivially.
    pub tau_meas: f64,
    /// Rabi period, s.
    pub tau_r: f64,
    /// Expected time for measurements alone to pin an equator state to
    /// a pole (z population 0.99), estimated by Monte Carlo, s.
    pub tau_m: f64,
    /// Ramsey coherence time, if dephasing is configured.
    pub tau_n: Option<f64>,
    /// Each adjacent pair must be separated by at least this factor for
    /// the ordering to count as satisfied.
    pub guard_factor: f64,
    pub ordering_ok: bool,
    pub warnings: Vec<String>,
}

/// Required separation between adjacent timescales.
const TIMESCALE_GUARD: f64 = 2.0;

/// Monte-Carlo estimate of the measurement collapse timescale plus the
/// ordering check. Uses a seed stream disjoint from the sweep streams.
pub fn timescale_report(cfg: &EstimationConfig) -> Result<TimescaleReport, EstimationError> {
    cfg.validate()?;
    let povm = build_symmetric_povm(cfg.p0, crate::povm::MeasurementAxis::z())?;
    let dt = cfg.epoch_spacing();
    let runs = 400;
    let cap = 1_000_000;
    let mut total_measurements = 0u64;
    for run in 0..runs {
        let mut rng = trajectory_rng(cfg.seed, u64::MAX, run);
        let mut state = QubitState::plus_x();
        let mut n = 0u64;
        while n < cap {
            let outcome = sample_outcome(&state, &povm, &mut rng);
            state = apply_measurement(&state, &povm, outcome)?.0;
            n += 1;
            let pg = state.amplitudes()[0].norm_sqr();
            if !(0.01..=0.99).contains(&pg) {
                break;
            }
        }
        total_measurements += n;
    }
    let tau_m = total_measurements as f64 / runs as f64 * dt;
    let tau_n = cfg.noise.dephasing.map(|d| d.tau_ramsey);
    let mut warnings = Vec::new();
    if cfg.rabi_period * TIMESCALE_GUARD > tau_m {
        warnings.push(format!(
            "Rabi period {:.3e} s is not well below the measurement collapse time {:.3e} s",
            cfg.rabi_period, tau_m
        ));
    }
    if let Some(tn) = tau_n {
        if tau_m * TIMESCALE_GUARD > tn {
            warnings.push(format!(
                "measurement collapse time {tau_m:.3e} s is not well below the coherence time {tn:.3e} s"
            ));
        }
    }
    Ok(TimescaleReport {
        tau_meas: 0.0,
        tau_r: cfg.rabi_period,
        tau_m,
        tau_n,
        guard_factor: TIMESCALE_GUARD,
        ordering_ok: warnings.is_empty(),
        warnings,
    })
}
