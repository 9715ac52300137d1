//! `unsharp`: compile symmetric unsharp measurements to ion pulse
//! programs, run the two Monte-Carlo experiments built on them, and
//! evaluate the hardware error budgets.

mod config;
mod manifest;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result, bail};
use clap::{Args, Parser, Subcommand};
use unsharp_core::budget::{LogicGateBudget, ReadoutBudget};
use unsharp_core::{
    EstimatorInit, MeasurementAxis, SweepVariable, build_symmetric_povm, compile_scheme1,
    compile_scheme2, run_estimation_trajectory, run_preparation, scheme2_effective_povm,
    sweep_estimation, sweep_preparation, timescale_report, trajectory_rng, verify_compilation,
};

use config::{EstimationSection, ParamsSection, PreparationSection, ResolvedEstimation,
    ResolvedParams, ResolvedPreparation};
use manifest::OutputCollector;

#[derive(Parser)]
#[command(
    name = "unsharp",
    version,
    about = "Simulate symmetric unsharp qubit measurements, their trapped-ion pulse programs, and the experiments built on them"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a measurement into a pulse program and verify it.
    Compile(CompileArgs),
    /// Sweep an error probability in the state-tracking experiment.
    Estimate(RunArgs),
    /// Sweep an error probability in the state-preparation experiment.
    Prepare(RunArgs),
    /// Evaluate the closed-form hardware budgets for both ion chains.
    EstimateParams(ParamsArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// Weight of the aligned projector, in [0, 0.5]; 0 is projective,
    /// 0.5 carries no information.
    #[arg(long)]
    p0: f64,
    /// Polar angle of the measurement axis, radians.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Azimuthal angle of the measurement axis, radians.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// 1 = pulsed three-level sequence (any axis); 2 = collective
    /// squeezing interaction (z axis only).
    #[arg(long)]
    scheme: u8,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
#[command(after_help = "\
CONFIG KEYS (TOML; every key optional, defaults in parentheses):
  version                      schema version (1)
  [estimation] / [preparation] subcommand section, see below
  sweep_variable               \"mapping-error\" or \"spontaneous-emission\"
  grid                         error probabilities to sweep
  n_trajectories (1000), seed (123456789)
  [<section>.noise]            p_wrong (0), p_spont (0)
  [<section>.noise.dephasing]  tau_ramsey: Ramsey coherence time, s

[estimation] keys:
  p0 (0.45)                    measurement strength parameter
  measurements_per_period (10) epochs per Rabi period
  rabi_period (0.1)            seconds
  duration_periods (30), transient_skip_periods (3)
  substeps_per_epoch (10)      dephasing integration steps per epoch
  estimator_init               \"known-initial\" (default) or \"plus-x\"

[preparation] keys:
  theta_target (pi/4), phi_target (pi/2)   target Bloch angles, radians
  p0 (0.15), tol_phi (0.05), tol_theta (0.05)
  max_measurements (500), guard_factor (2.0)
  count_resets (true)          include reset measurements in the count column

A manifest.json from a previous run can be passed as --config to replay
that run byte for byte.")]
struct RunArgs {
    /// TOML config file, or a manifest.json to replay.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for the trajectory pool (default: all cores).
    /// Results never depend on this.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also dump the first N trajectory records per grid point as JSON
    /// lines.
    #[arg(long, value_name = "N")]
    dump_trajectories: Option<usize>,
}

#[derive(Args)]
#[command(after_help = "\
CONFIG KEYS (TOML; every key optional unless its block is present):
  [params]
  n_lifetimes (23)             metastable lifetimes per logic measurement
  [params.readout]             pulsed-readout chain inputs
    alt_delta_t (1.5e-5)       externally quoted pulse interval, s
    p_single (7e-4)            externally quoted per-measurement decay
  [params.readout.laser]       power W, spot_radius m, wavelength m
                               (all three required when block present;
                               default 5 mW, 50 um, 435.5 nm)
  [params.readout.ion]         mass kg, metastable_lifetime s,
                               transition_omega rad/s, lamb_dicke,
                               stretch_mode_omega rad/s, detuning rad/s
                               (all required; default: Yb-171 E2 readout)
  [params.logic.laser]         default 5 mW, 50 um, 313 nm
  [params.logic.ion]           default: Be-9 pair, 85 GHz detuning
  [params.constants]           c, epsilon0, hbar (SI defaults)")]
struct ParamsArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Compile(args) => cmd_compile(&args),
        Cmd::Estimate(args) => cmd_estimate(&args),
        Cmd::Prepare(args) => cmd_prepare(&args),
        Cmd::EstimateParams(args) => cmd_estimate_params(&args),
    }
}

fn init_thread_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

/// Threshold above which a compiled program is considered broken.
const VERIFY_TOL: f64 = 1e-10;
/// Squeezing angle beyond which the weak-coupling description of the
/// effective measurement degrades noticeably.
const CHI_ADVISORY: f64 = 0.2;

fn cmd_compile(args: &CompileArgs) -> Result<()> {
    let start = Instant::now();
    let (program, povm) = match args.scheme {
        1 => {
            let axis = MeasurementAxis::new(args.theta, args.phi)?;
            (compile_scheme1(args.p0, axis)?, build_symmetric_povm(args.p0, axis)?)
        }
        2 => {
            if args.theta != 0.0 || args.phi != 0.0 {
                bail!("scheme 2 realizes the z axis only; omit --theta/--phi");
            }
            let delta_p = 1.0 - 2.0 * args.p0;
            if !(0.0..=1.0).contains(&delta_p) {
                bail!("p0 = {} outside [0, 0.5]", args.p0);
            }
            let chi = 0.5 * delta_p.asin();
            (compile_scheme2(chi)?, scheme2_effective_povm(chi)?)
        }
        other => bail!("unknown scheme {other} (expected 1 or 2)"),
    };
    let report = verify_compilation(&program, &povm)?;
    let chi = program.scheme2_chi();
    let wrapper = serde_json::json!({
        "report": report,
        "chi": chi,
        "beyond_weak_coupling": chi.is_some_and(|c| c > CHI_ADVISORY),
    });
    let mut collector = OutputCollector::new(&args.out)?;
    collector.write("program.txt", program.to_string().as_bytes())?;
    let mut report_text = serde_json::to_string_pretty(&wrapper)?;
    report_text.push('\n');
    collector.write("compile_report.json", report_text.as_bytes())?;
    let mut notes = vec![format!(
        "program verified against the abstract operators on both outcomes and four probe states; max deviation {:.3e}",
        report.max_deviation
    )];
    if report.zero_information {
        notes.push("p0 = 0.5: the two operators are identical and outcomes carry no information".into());
    }
    collector.finish("compile", 0, &wrapper, notes, start.elapsed().as_secs_f64())?;
    println!(
        "scheme {} program: {} pulses, max deviation {:.3e}",
        args.scheme,
        program.pulses().len(),
        report.max_deviation
    );
    if report.max_deviation > VERIFY_TOL {
        bail!(
            "compiled program deviates from the abstract measurement by {:.3e} (tolerance {VERIFY_TOL:.0e})",
            report.max_deviation
        );
    }
    Ok(())
}

fn sweep_name(variable: SweepVariable) -> &'static str {
    match variable {
        SweepVariable::MappingError => "mapping-error",
        SweepVariable::SpontaneousEmission => "spontaneous-emission",
    }
}

fn cmd_estimate(args: &RunArgs) -> Result<()> {
    let start = Instant::now();
    init_thread_pool(args.jobs)?;
    let mut resolved: ResolvedEstimation = match &args.config {
        Some(path) if manifest::is_manifest(path) => manifest::load_resolved(path, "estimate")?,
        Some(path) => config::load(path)?
            .estimation
            .map(|s| s.resolve())
            .unwrap_or_else(|| EstimationSection::default().resolve()),
        None => EstimationSection::default().resolve(),
    };
    if let Some(seed) = args.seed {
        resolved.config.seed = seed;
    }
    resolved.config.validate()?;
    if resolved.grid.is_empty() {
        bail!("sweep grid is empty");
    }

    let timescales = timescale_report(&resolved.config)?;
    for warning in &timescales.warnings {
        eprintln!("warning: {warning}");
    }

    let points = sweep_estimation(&resolved.config, resolved.sweep_variable, &resolved.grid)?;
    let mut collector = OutputCollector::new(&args.out)?;
    collector.write("estimation_sweep.csv", output::sweep_csv(&points).as_bytes())?;
    let mut timescale_text = serde_json::to_string_pretty(&timescales)?;
    timescale_text.push('\n');
    collector.write("timescales.json", timescale_text.as_bytes())?;
    if let Some(n) = args.dump_trajectories {
        collector.write("trajectories.jsonl", dump_estimation(&resolved, n)?.as_bytes())?;
    }

    let mut notes = vec![
        format!(
            "estimator starts at {}; per-epoch fidelity is averaged after {} transient periods, then over trajectories",
            match resolved.config.estimator_init {
                EstimatorInit::KnownInitial => "the known initial state",
                EstimatorInit::PlusX => "the maximally uncertain |+x> state",
            },
            resolved.config.transient_skip_periods
        ),
        format!(
            "sweep variable: {} probability per measurement",
            sweep_name(resolved.sweep_variable)
        ),
        "per-trajectory RNG streams derive from (seed, grid index, trajectory index); results are independent of --jobs".into(),
    ];
    notes.extend(timescales.warnings.iter().map(|w| format!("warning: {w}")));
    let seed = resolved.config.seed;
    collector.finish("estimate", seed, &resolved, notes, start.elapsed().as_secs_f64())?;
    println!(
        "estimate: {} grid points x {} trajectories -> {}",
        points.len(),
        resolved.config.n_trajectories,
        args.out.join("estimation_sweep.csv").display()
    );
    Ok(())
}

fn dump_estimation(resolved: &ResolvedEstimation, n: usize) -> Result<String> {
    let mut out = String::new();
    for (sweep_idx, &value) in resolved.grid.iter().enumerate() {
        let mut cfg = resolved.config;
        match resolved.sweep_variable {
            SweepVariable::MappingError => cfg.noise.p_wrong = value,
            SweepVariable::SpontaneousEmission => cfg.noise.p_spont = value,
        }
        for traj in 0..n.min(cfg.n_trajectories) {
            let mut rng = trajectory_rng(resolved.config.seed, sweep_idx as u64, traj as u64);
            let record = run_estimation_trajectory(&cfg, &mut rng)?;
            let line = serde_json::json!({
                "grid_value": value,
                "trajectory": traj,
                "record": record,
            });
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
    }
    Ok(out)
}

fn cmd_prepare(args: &RunArgs) -> Result<()> {
    let start = Instant::now();
    init_thread_pool(args.jobs)?;
    let mut resolved: ResolvedPreparation = match &args.config {
        Some(path) if manifest::is_manifest(path) => manifest::load_resolved(path, "prepare")?,
        Some(path) => config::load(path)?
            .preparation
            .map(|s| s.resolve())
            .unwrap_or_else(|| PreparationSection::default().resolve()),
        None => PreparationSection::default().resolve(),
    };
    if let Some(seed) = args.seed {
        resolved.config.seed = seed;
    }
    resolved.config.validate()?;
    if resolved.grid.is_empty() {
        bail!("sweep grid is empty");
    }

    // identical trajectories either way; only the reported count column
    // changes between the two files
    let points = sweep_preparation(&resolved.config, resolved.sweep_variable, &resolved.grid)?;
    let mut other_cfg = resolved.config;
    other_cfg.count_resets = !other_cfg.count_resets;
    let other_points = sweep_preparation(&other_cfg, resolved.sweep_variable, &resolved.grid)?;
    let (with_resets, stage_only) = if resolved.config.count_resets {
        (&points, &other_points)
    } else {
        (&other_points, &points)
    };

    let mut collector = OutputCollector::new(&args.out)?;
    collector.write("preparation_fidelity.csv", output::sweep_csv(with_resets).as_bytes())?;
    collector.write("preparation_count.csv", output::sweep_csv(stage_only).as_bytes())?;
    if let Some(n) = args.dump_trajectories {
        collector.write("trajectories.jsonl", dump_preparation(&resolved, n)?.as_bytes())?;
    }

    let notes = vec![
        "preparation_fidelity.csv counts every physical measurement including projective resets; preparation_count.csv counts stage measurements only".into(),
        format!(
            "wrong-direction rule: reset once the stage's angular distance to target exceeds its stage-entry value by guard_factor ({}) times the stage tolerance",
            resolved.config.guard_factor
        ),
        "stage decisions use the tracked state conditioned on reported outcomes; error channels act on the true state".into(),
        format!(
            "sweep variable: {} probability per measurement",
            sweep_name(resolved.sweep_variable)
        ),
        "per-trajectory RNG streams derive from (seed, grid index, trajectory index); results are independent of --jobs".into(),
    ];
    let seed = resolved.config.seed;
    collector.finish("prepare", seed, &resolved, notes, start.elapsed().as_secs_f64())?;
    println!(
        "prepare: {} grid points x {} trajectories -> {}",
        points.len(),
        resolved.config.n_trajectories,
        args.out.join("preparation_fidelity.csv").display()
    );
    Ok(())
}

fn dump_preparation(resolved: &ResolvedPreparation, n: usize) -> Result<String> {
    let mut out = String::new();
    for (sweep_idx, &value) in resolved.grid.iter().enumerate() {
        let mut cfg = resolved.config;
        match resolved.sweep_variable {
            SweepVariable::MappingError => cfg.noise.p_wrong = value,
            SweepVariable::SpontaneousEmission => cfg.noise.p_spont = value,
        }
        for traj in 0..n.min(cfg.n_trajectories) {
            let mut rng = trajectory_rng(resolved.config.seed, sweep_idx as u64, traj as u64);
            let record = run_preparation(&cfg, &mut rng)?;
            let line = serde_json::json!({
                "grid_value": value,
                "trajectory": traj,
                "record": record,
            });
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
    }
    Ok(out)
}

fn cmd_estimate_params(args: &ParamsArgs) -> Result<()> {
    let start = Instant::now();
    let resolved: ResolvedParams = match &args.config {
        Some(path) => config::load(path)?
            .params
            .map(|s| s.resolve())
            .unwrap_or_else(|| ParamsSection::default().resolve()),
        None => ParamsSection::default().resolve(),
    };
    let readout = ReadoutBudget::compute(
        &resolved.readout_laser,
        &resolved.readout_ion,
        &resolved.constants,
        resolved.alt_delta_t,
        resolved.p_single,
    );
    let logic = LogicGateBudget::compute(
        &resolved.logic_laser,
        &resolved.logic_ion,
        &resolved.constants,
        resolved.n_lifetimes,
    );
    let json = serde_json::json!({
        "inputs": resolved,
        "readout": readout,
        "logic": logic,
    });
    let mut collector = OutputCollector::new(&args.out)?;
    collector.write("params.txt", output::flat_report(&json).as_bytes())?;
    let mut pretty = serde_json::to_string_pretty(&json)?;
    pretty.push('\n');
    collector.write("params.json", pretty.as_bytes())?;
    let notes = vec![
        "beam intensity uses area = pi * spot_radius^2".into(),
        "coupling moments and sideband frequencies are reported in two formula variants (standard and no-hbar) without choosing between them".into(),
        "half-decay counts are reported from the computed pulse interval, the externally quoted interval, and the quoted per-measurement probability".into(),
    ];
    collector.finish("estimate-params", 0, &resolved, notes, start.elapsed().as_secs_f64())?;
    println!(
        "estimate-params: readout e0 = {:.4e} V/m, logic cumulative decay = {:.4e} -> {}",
        readout.e0,
        logic.cumulative_p_sp,
        args.out.join("params.txt").display()
    );
    Ok(())
}
