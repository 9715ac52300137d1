//! Simulation of symmetric two-outcome unsharp qubit measurements and
//! their realization on trapped-ion hardware.
//!
//! The crate is organized around a small abstract layer and the physics
//! built on top of it:
//!
//! - [`mat2`]: minimal complex 2x2 matrix arithmetic.
//! - [`povm`]: the symmetric measurement family, state updates, sampling.
//! - [`scheme`]: compilation into ion pulse sequences and the collective
//!   squeezing alternative, with self-verification.
//! - [`noise`]: magnetic-field dephasing, outcome mapping errors, and
//!   spontaneous emission applied to simulated runs.
//! - [`budget`]: closed-form hardware error and timing budgets for a
//!   concrete readout and logic ion pair.
//! - [`estimation`]: measurement-backed tracking of a Rabi oscillation.
//! - [`preparation`]: measurement-only steering toward a target state.
//! - [`seed`]: deterministic per-trajectory RNG derivation.

pub mod budget;
pub mod estimation;
pub mod mat2;
pub mod noise;
pub mod povm;
pub mod preparation;
pub mod scheme;
pub mod seed;

pub use mat2::{C64, Mat2};
pub use povm::{
    MeasurementAxis, Outcome, PovmError, QubitState, SymmetricPovm, apply_measurement,
    bloch_angles, build_symmetric_povm, fidelity, outcome_probability, projectors,
    sample_outcome,
};
pub use scheme::{
    BasisLayout, CompilationReport, CompositeState, Pulse, PulseKind, PulseProgram, Scheme,
    SchemeError, Transition, branch_coefficients, carrier_pulse, compile_scheme1,
    compile_scheme2, first_order_delta_p, fluorescence_readout, kitagawa_diagonal, qls_map,
    readout_branches, run_scheme1, scheme2_effective_povm, scheme2_evolve, verify_compilation,
    zz_coupling_diagonal,
};
pub use estimation::{
    EstimationConfig, EstimationError, EstimatorInit, SweepPoint, SweepVariable,
    TimescaleReport, TrajectoryRecord, TrajectoryStep, run_estimation_trajectory,
    sweep_estimation, timescale_report,
};
pub use noise::{
    DephasingConfig, MappingErrorConfig, NoiseConfig, SpontaneousEmissionConfig,
    delta_beta_from_ramsey, evolve_ideal, evolve_with_dephasing, flip_outcome,
    ramsey_coherence, spontaneous_collapse,
};
pub use preparation::{
    PreparationConfig, PreparationError, PreparationRecord, reset_to_psi0, run_preparation,
    sweep_preparation,
};
pub use seed::{derive_seed, trajectory_rng};
