//! Photon-ramp experiment: average photon number of a single KPO while the
//! pump amplitude ramps linearly, in both the simple and SC models.

use std::time::Instant;

use serde_json::json;

use kposim_core::dynamics::{schrodinger_propagate, SolverSettings};
use kposim_core::fock::{fock_dim_for_amplitude, number, HilbertSpace, StateVector};
use kposim_core::hamiltonian::{
    build_sc_single, build_simple_single_ramped, calibrate_resonance, sc_static_hamiltonian,
    FluxTone,
};
use kposim_core::params::{kerr_and_pump, KpoParams, PumpTone, SimpleModelParams};
use kposim_core::units::{ghz, to_ghz, to_mhz};

use crate::config::{ExperimentConfig, PumpFreqModeKey};
use crate::csvio::CsvTable;
use crate::manifest::{ConvergenceEvidence, RunManifest};
use crate::{CliError, CliResult};

use super::{ensure_output_dir, RunOptions};

/// Abort threshold for certification: end-of-ramp photon-number change under
/// halved tolerances or a +8 Fock bump (well inside the ±0.5 acceptance
/// window).
const CERTIFY_THRESHOLD: f64 = 0.05;

struct RampInputs {
    params: KpoParams,
    delta_p_max: f64,
    t_ramp: f64,
    kerr: f64,
    pump_max: f64,
    omega_p_explicit: Option<f64>,
}

fn ramp_inputs(config: &ExperimentConfig) -> CliResult<RampInputs> {
    let ramp = config
        .ramp
        .as_ref()
        .ok_or_else(|| CliError::Config("photon-ramp needs a [ramp] block".into()))?;
    if ramp.delta_p_max < 0.0 || ramp.t_ns <= 0.0 {
        return Err(CliError::Config("invalid [ramp] parameters".into()));
    }
    let params = config.kpo1.to_params()?;
    let tone = PumpTone::new(ramp.delta_p_max, 0.0).map_err(|e| CliError::Config(e.to_string()))?;
    if tone.beyond_small_pump() {
        eprintln!(
            "warning: delta_p_max = {} is beyond the small-pump regime",
            ramp.delta_p_max
        );
    }
    let (kerr, pump_max) = kerr_and_pump(&params, &tone);
    let omega_p_explicit = match config.pump.pump_freq_mode {
        PumpFreqModeKey::AutoCalibrated => None,
        PumpFreqModeKey::Explicit => Some(ghz(config.pump.omega_p1_ghz.ok_or_else(|| {
            CliError::Config("explicit pump_freq_mode needs omega_p1_GHz".into())
        })?)),
    };
    Ok(RampInputs {
        params,
        delta_p_max: ramp.delta_p_max,
        t_ramp: ramp.t_ns,
        kerr,
        pump_max,
        omega_p_explicit,
    })
}

struct RampCurves {
    times: Vec<f64>,
    n_simple: Vec<f64>,
    n_sc: Vec<f64>,
    omega_tilde: f64,
}

fn run_curves(
    inputs: &RampInputs,
    dim: usize,
    settings: &SolverSettings,
) -> CliResult<RampCurves> {
    let space = HilbertSpace::single(dim)?;
    let vacuum = StateVector::basis(&space, &[0])?;
    let n_op = number(&space, 0)?;

    // Simple model: P(t) = P_max t/T in the rotating frame.
    let sp = SimpleModelParams {
        detuning: 0.0,
        kerr: inputs.kerr,
        pump: inputs.pump_max,
        g: 0.0,
        delta12: 0.0,
    };
    let h_simple = build_simple_single_ramped(&space, &sp, inputs.t_ramp)?;
    let (_, traj_simple) = schrodinger_propagate(
        &h_simple,
        &vacuum,
        0.0,
        inputs.t_ramp,
        settings,
        &[&n_op],
    )?;

    // SC model: lab frame, pump frequency at twice the calibrated resonance.
    let omega_tilde = calibrate_resonance(&sc_static_hamiltonian(&space, &inputs.params)?)?;
    let omega_p = inputs.omega_p_explicit.unwrap_or(2.0 * omega_tilde);
    let tone = FluxTone::ramped(inputs.delta_p_max, omega_p, inputs.t_ramp);
    let mut h_sc = build_sc_single(&space, &inputs.params, &[tone])?;
    let e_ref = h_sc.expectation(0.0, &vacuum)?.re;
    h_sc.shift_energy(e_ref);
    let (_, traj_sc) =
        schrodinger_propagate(&h_sc, &vacuum, 0.0, inputs.t_ramp, settings, &[&n_op])?;

    Ok(RampCurves {
        times: traj_simple.times.clone(),
        n_simple: traj_simple.observables[0].clone(),
        n_sc: traj_sc.observables[0].clone(),
        omega_tilde,
    })
}

fn final_of(traj: &[f64]) -> f64 {
    *traj.last().expect("non-empty trajectory")
}

pub fn run_photon_ramp(
    config: ExperimentConfig,
    options: &RunOptions,
    started: Instant,
) -> CliResult<()> {
    let inputs = ramp_inputs(&config)?;
    let settings = config.solver.to_settings()?;
    let alpha_final = (inputs.pump_max / inputs.kerr).sqrt();
    let dim = config
        .solver
        .fock_dim
        .unwrap_or_else(|| fock_dim_for_amplitude(alpha_final));
    let n_expected = inputs.pump_max / inputs.kerr;

    eprintln!(
        "photon-ramp: delta_p,max = {}, T = {} ns, K/h = {:.3} MHz, P/K = {:.3}, D = {dim}",
        inputs.delta_p_max,
        inputs.t_ramp,
        to_mhz(inputs.kerr),
        n_expected
    );

    let curves = run_curves(&inputs, dim, &settings)?;

    let mut table = CsvTable::new(&["t_ns", "n_simple", "n_sc", "n_diff"]);
    let mut max_abs_diff = 0.0f64;
    for i in 0..curves.times.len() {
        let diff = curves.n_simple[i] - curves.n_sc[i];
        max_abs_diff = max_abs_diff.max(diff.abs());
        table.push(vec![curves.times[i], curves.n_simple[i], curves.n_sc[i], diff]);
    }
    let n_simple_final = final_of(&curves.n_simple);
    let n_sc_final = final_of(&curves.n_sc);
    eprintln!(
        "photon-ramp: final <n> simple = {n_simple_final:.4}, sc = {n_sc_final:.4} \
         (P/K = {n_expected:.4}), max |diff| = {max_abs_diff:.4}"
    );

    // Convergence certification: halved tolerances, then a +8 Fock bump.
    let convergence = if config.solver.certify {
        let half = run_curves(
            &inputs,
            dim,
            &SolverSettings {
                rel_tol: settings.rel_tol / 2.0,
                abs_tol: settings.abs_tol / 2.0,
                ..settings
            },
        )?;
        let bumped = run_curves(&inputs, dim + 8, &settings)?;
        let half_delta = (final_of(&half.n_simple) - n_simple_final)
            .abs()
            .max((final_of(&half.n_sc) - n_sc_final).abs());
        let bump_delta = (final_of(&bumped.n_simple) - n_simple_final)
            .abs()
            .max((final_of(&bumped.n_sc) - n_sc_final).abs());
        eprintln!(
            "photon-ramp: certification deltas: half-tolerance {half_delta:.2e}, \
             Fock +8 {bump_delta:.2e}"
        );
        let evidence = ConvergenceEvidence {
            half_tolerance_delta: half_delta,
            fock_bump_delta: bump_delta,
            threshold: CERTIFY_THRESHOLD,
        };
        if half_delta > CERTIFY_THRESHOLD || bump_delta > CERTIFY_THRESHOLD {
            return Err(CliError::Convergence(format!(
                "photon ramp failed certification: half-tolerance delta {half_delta:.3e}, \
                 Fock-bump delta {bump_delta:.3e}, threshold {CERTIFY_THRESHOLD:.1e}"
            )));
        }
        Some(evidence)
    } else {
        None
    };

    let dir = ensure_output_dir(&config)?;
    let csv_path = dir.join("photon_ramp.csv");
    table.write(&csv_path)?;
    if options.plot {
        crate::svg::plot(
            &table,
            "average photon number during the pump ramp",
            false,
            false,
            &dir.join("photon_ramp.svg"),
        )?;
    }

    let mut manifest = RunManifest::new("photon-ramp", config);
    manifest.resolved = json!({
        "K_MHz": to_mhz(inputs.kerr),
        "P_max_MHz": to_mhz(inputs.pump_max),
        "P_over_K": n_expected,
        "delta_p_max": inputs.delta_p_max,
        "T_ns": inputs.t_ramp,
        "omega_tilde_GHz": to_ghz(curves.omega_tilde),
        "omega_p_GHz": to_ghz(inputs.omega_p_explicit.unwrap_or(2.0 * curves.omega_tilde)),
        "fock_dim": dim,
    });
    manifest.summary = json!({
        "n_simple_final": n_simple_final,
        "n_sc_final": n_sc_final,
        "n_expected": n_expected,
        "max_abs_diff": max_abs_diff,
    });
    manifest.outputs = vec!["photon_ramp.csv".into()];
    manifest.convergence = convergence;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&dir)?;
    let _ = options.workers;
    eprintln!("photon-ramp: wrote {}", csv_path.display());
    Ok(())
}
