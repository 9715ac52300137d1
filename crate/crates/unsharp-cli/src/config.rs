//! Configuration file schema and resolution.
//!
//! One TOML file can carry sections for every subcommand; each
//! subcommand reads only its own section. Every key is optional and
//! falls back to the built-in defaults, except that a section which is
//! present must be complete where noted (laser and ion parameter
//! blocks). Unknown keys are rejected so typos fail loudly.

use std::path::Path;

use anyhow::{Context, Result, bail};
use serde::{Deserialize, Serialize};
use unsharp_core::budget::{IonParams, LaserParams, PhysicalConstants};
use unsharp_core::noise::{DephasingConfig, NoiseConfig};
use unsharp_core::{EstimationConfig, EstimatorInit, PreparationConfig, SweepVariable};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub version: Option<u32>,
    pub estimation: Option<EstimationSection>,
    pub preparation: Option<PreparationSection>,
    pub params: Option<ParamsSection>,
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let cfg: FileConfig = toml::from_str(&text)
        .with_context(|| format!("parsing config file {}", path.display()))?;
    if let Some(v) = cfg.version {
        if v != CONFIG_VERSION {
            bail!("config version {v} not supported (expected {CONFIG_VERSION})");
        }
    }
    Ok(cfg)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub p_wrong: Option<f64>,
    pub p_spont: Option<f64>,
    pub dephasing: Option<DephasingSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSection {
    pub tau_ramsey: f64,
}

impl NoiseSection {
    fn resolve(&self) -> NoiseConfig {
        NoiseConfig {
            dephasing: self
                .dephasing
                .as_ref()
                .map(|d| DephasingConfig { tau_ramsey: d.tau_ramsey }),
            p_wrong: self.p_wrong.unwrap_or(0.0),
            p_spont: self.p_spont.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSection {
    pub p0: Option<f64>,
    pub measurements_per_period: Option<usize>,
    pub rabi_period: Option<f64>,
    pub duration_periods: Option<usize>,
    pub transient_skip_periods: Option<usize>,
    pub substeps_per_epoch: Option<usize>,
    pub estimator_init: Option<EstimatorInit>,
    pub n_trajectories: Option<usize>,
    pub seed: Option<u64>,
    pub sweep_variable: Option<SweepVariable>,
    pub grid: Option<Vec<f64>>,
    pub noise: Option<NoiseSection>,
}

/// Fully resolved sweep request; this is what the manifest snapshots
/// and what a replay reuses verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedEstimation {
    pub config: EstimationConfig,
    pub sweep_variable: SweepVariable,
    pub grid: Vec<f64>,
}

fn default_estimation_grid(variable: SweepVariable) -> Vec<f64> {
    match variable {
        SweepVariable::MappingError => vec![0.0, 0.02, 0.05, 0.1, 0.2],
        SweepVariable::SpontaneousEmission => vec![0.0, 0.0005, 0.001, 0.002, 0.005],
    }
}

impl EstimationSection {
    pub fn resolve(&self) -> ResolvedEstimation {
        let d = EstimationConfig::default();
        let config = EstimationConfig {
            p0: self.p0.unwrap_or(d.p0),
            measurements_per_period: self
                .measurements_per_period
                .unwrap_or(d.measurements_per_period),
            rabi_period: self.rabi_period.unwrap_or(d.rabi_period),
            noise: self.noise.as_ref().map(|n| n.resolve()).unwrap_or_default(),
            n_trajectories: self.n_trajectories.unwrap_or(d.n_trajectories),
            duration_periods: self.duration_periods.unwrap_or(d.duration_periods),
            transient_skip_periods: self
                .transient_skip_periods
                .unwrap_or(d.transient_skip_periods),
            substeps_per_epoch: self.substeps_per_epoch.unwrap_or(d.substeps_per_epoch),
            estimator_init: self.estimator_init.unwrap_or(d.estimator_init),
            seed: self.seed.unwrap_or(d.seed),
        };
        let sweep_variable = self.sweep_variable.unwrap_or(SweepVariable::MappingError);
        let grid = self
            .grid
            .clone()
            .unwrap_or_else(|| default_estimation_grid(sweep_variable));
        ResolvedEstimation { config, sweep_variable, grid }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationSection {
    pub theta_target: Option<f64>,
    pub phi_target: Option<f64>,
    pub p0: Option<f64>,
    pub tol_phi: Option<f64>,
    pub tol_theta: Option<f64>,
    pub max_measurements: Option<usize>,
    pub guard_factor: Option<f64>,
    pub count_resets: Option<bool>,
    pub n_trajectories: Option<usize>,
    pub seed: Option<u64>,
    pub sweep_variable: Option<SweepVariable>,
    pub grid: Option<Vec<f64>>,
    pub noise: Option<NoiseSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPreparation {
    pub config: PreparationConfig,
    pub sweep_variable: SweepVariable,
    pub grid: Vec<f64>,
}

impl PreparationSection {
    pub fn resolve(&self) -> ResolvedPreparation {
        let d = PreparationConfig::default();
        let config = PreparationConfig {
            theta_target: self.theta_target.unwrap_or(d.theta_target),
            phi_target: self.phi_target.unwrap_or(d.phi_target),
            p0: self.p0.unwrap_or(d.p0),
            tol_phi: self.tol_phi.unwrap_or(d.tol_phi),
            tol_theta: self.tol_theta.unwrap_or(d.tol_theta),
            max_measurements: self.max_measurements.unwrap_or(d.max_measurements),
            guard_factor: self.guard_factor.unwrap_or(d.guard_factor),
            count_resets: self.count_resets.unwrap_or(d.count_resets),
            n_trajectories: self.n_trajectories.unwrap_or(d.n_trajectories),
            seed: self.seed.unwrap_or(d.seed),
            noise: self.noise.as_ref().map(|n| n.resolve()).unwrap_or_default(),
        };
        let sweep_variable = self
            .sweep_variable
            .unwrap_or(SweepVariable::SpontaneousEmission);
        let grid = self
            .grid
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.02, 0.05, 0.1, 0.2]);
        ResolvedPreparation { config, sweep_variable, grid }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    /// Metastable-state lifetimes spent inside one logic measurement.
    pub n_lifetimes: Option<f64>,
    pub readout: Option<ReadoutSection>,
    pub logic: Option<LogicSection>,
    pub constants: Option<ConstantsSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    /// Externally quoted pulse interval to evaluate alongside the
    /// computed one, s.
    pub alt_delta_t: Option<f64>,
    /// Externally quoted per-measurement decay probability.
    pub p_single: Option<f64>,
    pub laser: Option<LaserSection>,
    pub ion: Option<IonSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogicSection {
    pub laser: Option<LaserSection>,
    pub ion: Option<IonSection>,
}

/// A laser block, when given, must be complete.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    /// W
    pub power: f64,
    /// m
    pub spot_radius: f64,
    /// m
    pub wavelength: f64,
}

impl LaserSection {
    fn resolve(&self) -> LaserParams {
        LaserParams {
            power: self.power,
            spot_radius: self.spot_radius,
            wavelength: self.wavelength,
        }
    }
}

/// An ion block, when given, must be complete. All SI units.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonSection {
    /// kg
    pub mass: f64,
    /// s
    pub metastable_lifetime: f64,
    /// rad/s
    pub transition_omega: f64,
    pub lamb_dicke: f64,
    /// rad/s
    pub stretch_mode_omega: f64,
    /// rad/s
    pub detuning: f64,
}

impl IonSection {
    fn resolve(&self) -> IonParams {
        IonParams {
            mass: self.mass,
            metastable_lifetime: self.metastable_lifetime,
            transition_omega: self.transition_omega,
            lamb_dicke: self.lamb_dicke,
            stretch_mode_omega: self.stretch_mode_omega,
            detuning: self.detuning,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub c: f64,
    pub epsilon0: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub constants: PhysicalConstants,
    pub readout_laser: LaserParams,
    pub readout_ion: IonParams,
    pub alt_delta_t: f64,
    pub p_single: f64,
    pub logic_laser: LaserParams,
    pub logic_ion: IonParams,
    pub n_lifetimes: f64,
}

impl ParamsSection {
    pub fn resolve(&self) -> ResolvedParams {
        let constants = self
            .constants
            .as_ref()
            .map(|c| PhysicalConstants { c: c.c, epsilon0: c.epsilon0, hbar: c.hbar })
            .unwrap_or_default();
        let readout = self.readout.as_ref();
        let logic = self.logic.as_ref();
        ResolvedParams {
            readout_laser: readout
                .and_then(|r| r.laser.as_ref())
                .map(|l| l.resolve())
                .unwrap_or_else(|| LaserParams::reference_beam(435.5e-9)),
            readout_ion: readout
                .and_then(|r| r.ion.as_ref())
                .map(|i| i.resolve())
                .unwrap_or_else(|| IonParams::ytterbium_readout(&constants)),
            alt_delta_t: readout.and_then(|r| r.alt_delta_t).unwrap_or(15e-6),
            p_single: readout.and_then(|r| r.p_single).unwrap_or(7e-4),
            logic_laser: logic
                .and_then(|l| l.laser.as_ref())
                .map(|l| l.resolve())
                .unwrap_or_else(|| LaserParams::reference_beam(313e-9)),
            logic_ion: logic
                .and_then(|l| l.ion.as_ref())
                .map(|i| i.resolve())
                .unwrap_or_else(|| IonParams::beryllium_logic(&constants)),
            n_lifetimes: self.n_lifetimes.unwrap_or(23.0),
            constants,
        }
    }
}
