//! The four experiment commands.

mod calibrate;
mod loss_sweep;
mod photon_ramp;
mod rzz_sweep;

pub use calibrate::run_calibrate;
pub use loss_sweep::run_loss_sweep;
pub use photon_ramp::run_photon_ramp;
pub use rzz_sweep::run_rzz_sweep;

use std::path::PathBuf;
use std::time::Instant;

use kposim_core::gate::ResolvedParams;
use kposim_core::units::{to_ghz, to_mhz};
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    pub plot: bool,
}

/// Dispatch a command; the config's experiment.kind must agree with the
/// subcommand.
pub fn dispatch(
    kind: ExperimentKind,
    config: ExperimentConfig,
    options: &RunOptions,
) -> CliResult<()> {
    if config.experiment.kind != kind {
        return Err(CliError::Config(format!(
            "config declares experiment.kind = {:?} but the subcommand is {:?}",
            config.experiment.kind, kind
        )));
    }
    let started = Instant::now();
    match kind {
        ExperimentKind::PhotonRamp => run_photon_ramp(config, options, started),
        ExperimentKind::RzzSweep => run_rzz_sweep(config, options, started),
        ExperimentKind::LossSweep => run_loss_sweep(config, options, started),
        ExperimentKind::Calibrate => run_calibrate(config, options, started),
    }
}

pub(crate) fn ensure_output_dir(config: &ExperimentConfig) -> CliResult<PathBuf> {
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub(crate) fn thread_pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))
}

/// Resolved two-KPO parameters in presentation units for the manifest and
/// the calibrate table.
pub(crate) fn resolved_to_json(r: &ResolvedParams) -> serde_json::Value {
    json!({
        "K_MHz": to_mhz(r.kerr),
        "P_MHz": to_mhz(r.pump),
        "alpha": r.alpha,
        "g_MHz": to_mhz(r.g),
        "E_C0_GHz": to_ghz(r.e_c0),
        "omega1_GHz": to_ghz(r.omega1),
        "omega2_GHz": to_ghz(r.omega2),
        "Delta12_GHz": to_ghz(r.delta12),
        "fock_dim": r.fock_dim,
        "delta_p1": r.delta_p1,
        "delta_p2": r.delta_p2,
        "omega_tilde1_GHz": r.omega_tilde1.map(to_ghz),
        "omega_tilde2_GHz": r.omega_tilde2.map(to_ghz),
        "omega_p1_GHz": r.omega_p1.map(to_ghz),
        "omega_p2_GHz": r.omega_p2.map(to_ghz),
        "omega_gate_GHz": r.omega_gate.map(to_ghz),
    })
}
