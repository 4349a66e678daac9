//! Print and persist the resolved parameter table used by the other
//! commands: circuit energies, K, P, flux amplitudes, the coupler inversion
//! and the calibrated resonances.

use std::time::Instant;

use serde_json::json;

use kposim_core::fock::{fock_dim_for_amplitude, HilbertSpace};
use kposim_core::gate::resolve_rzz_params;
use kposim_core::hamiltonian::{calibrate_resonance, sc_static_hamiltonian};
use kposim_core::params::{
    delta_for_pump, kerr_and_pump, omega_from_circuit, CouplingParams, PumpTone,
};
use kposim_core::units::{to_ghz, to_mhz};

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use crate::{CliError, CliResult};

use super::{ensure_output_dir, resolved_to_json, RunOptions};

fn print_row(name: &str, value: String) {
    println!("{name:<22} {value}");
}

pub fn run_calibrate(
    config: ExperimentConfig,
    options: &RunOptions,
    started: Instant,
) -> CliResult<()> {
    let kpo1 = config.kpo1.to_params()?;
    println!("resolved parameters");
    println!("{}", "-".repeat(44));
    print_row("E_C1/h", format!("{:.6} GHz", to_ghz(kpo1.e_c)));
    print_row("E_J1/h", format!("{:.6} GHz", to_ghz(kpo1.e_j)));
    print_row("E~_J1/h", format!("{:.6} GHz", to_ghz(kpo1.ej_eff())));
    print_row("omega1/2pi", format!("{:.6} GHz", to_ghz(omega_from_circuit(&kpo1))));
    print_row("N", format!("{}", kpo1.n_squid));
    print_row("theta0", format!("{:.6} rad", kpo1.theta0));
    print_row("Delta (detuning)", "0 (rotating frame)".to_string());
    if kpo1.transmon_ratio() > kposim_core::params::TRANSMON_RATIO_WARN {
        eprintln!(
            "warning: E_C/E~_J = {:.4} is outside the transmon regime",
            kpo1.transmon_ratio()
        );
    }

    let resolved_json;
    if config.kpo2.is_some() {
        // Two-KPO gate circuit.
        let setup = config.to_rzz_setup()?;
        let resolved = resolve_rzz_params(&setup).map_err(CliError::from)?;
        let kpo2 = setup.kpo2;
        print_row("E_C2/h", format!("{:.6} GHz", to_ghz(kpo2.e_c)));
        print_row("E~_J2/h", format!("{:.6} GHz", to_ghz(kpo2.ej_eff())));
        print_row("omega2/2pi", format!("{:.6} GHz", to_ghz(resolved.omega2)));
        print_row("Delta12/2pi", format!("{:.6} GHz", to_ghz(resolved.delta12)));
        print_row("K/h", format!("{:.6} MHz", to_mhz(resolved.kerr)));
        print_row("P/h", format!("{:.6} MHz", to_mhz(resolved.pump)));
        print_row("alpha", format!("{:.6}", resolved.alpha));
        print_row("g/2pi", format!("{:.6} MHz", to_mhz(resolved.g)));
        print_row("E_C0/h", format!("{:.4} GHz", to_ghz(resolved.e_c0)));
        let coupling = CouplingParams::from_e_c0(resolved.e_c0)
            .map_err(|e| CliError::Config(e.to_string()))?;
        print_row(
            "charge coupling",
            format!("{:.6} MHz", to_mhz(coupling.charge_coupling(&setup.kpo1, &kpo2))),
        );
        if let (Some(d1), Some(d2)) = (resolved.delta_p1, resolved.delta_p2) {
            print_row("delta_p1", format!("{d1:.6}"));
            print_row("delta_p2", format!("{d2:.6}"));
        }
        if let (Some(w1), Some(w2)) = (resolved.omega_tilde1, resolved.omega_tilde2) {
            print_row("omega~1/2pi", format!("{:.6} GHz", to_ghz(w1)));
            print_row("omega~2/2pi", format!("{:.6} GHz", to_ghz(w2)));
        }
        if let (Some(p1), Some(p2)) = (resolved.omega_p1, resolved.omega_p2) {
            print_row("omega_p1/2pi", format!("{:.6} GHz", to_ghz(p1)));
            print_row("omega_p2/2pi", format!("{:.6} GHz", to_ghz(p2)));
        }
        if let Some(wg) = resolved.omega_gate {
            print_row("omega_gate/2pi", format!("{:.6} GHz", to_ghz(wg)));
        }
        print_row("fock_dim", format!("{}", resolved.fock_dim));
        resolved_json = resolved_to_json(&resolved);
    } else {
        // Single-KPO circuit (the photon-ramp configuration).
        let delta_p = config
            .pump
            .delta_p
            .or(config.ramp.as_ref().map(|r| r.delta_p_max))
            .ok_or_else(|| {
                CliError::Config("single-KPO calibrate needs pump.delta_p or [ramp]".into())
            })?;
        let tone = PumpTone::new(delta_p, 0.0).map_err(|e| CliError::Config(e.to_string()))?;
        let (kerr, pump) = kerr_and_pump(&kpo1, &tone);
        let alpha = (pump / kerr).sqrt();
        let dim = config
            .solver
            .fock_dim
            .unwrap_or_else(|| fock_dim_for_amplitude(alpha));
        let space = HilbertSpace::single(dim)?;
        let omega_tilde = calibrate_resonance(&sc_static_hamiltonian(&space, &kpo1)?)?;
        print_row("K/h", format!("{:.6} MHz", to_mhz(kerr)));
        print_row("delta_p", format!("{delta_p:.6}"));
        print_row("P/h", format!("{:.6} MHz", to_mhz(pump)));
        print_row("P/K", format!("{:.6}", pump / kerr));
        print_row("omega~1/2pi", format!("{:.6} GHz", to_ghz(omega_tilde)));
        print_row("omega_p/2pi", format!("{:.6} GHz", to_ghz(2.0 * omega_tilde)));
        print_row("fock_dim", format!("{dim}"));
        print_row(
            "round trip delta_p",
            format!("{:.6}", delta_for_pump(pump, &kpo1).map_err(CliError::from)?),
        );
        resolved_json = json!({
            "K_MHz": to_mhz(kerr),
            "P_MHz": to_mhz(pump),
            "P_over_K": pump / kerr,
            "delta_p": delta_p,
            "omega_tilde_GHz": to_ghz(omega_tilde),
            "omega_p_GHz": to_ghz(2.0 * omega_tilde),
            "fock_dim": dim,
        });
    }

    let dir = ensure_output_dir(&config)?;
    let mut manifest = RunManifest::new("calibrate", config);
    manifest.resolved = resolved_json;
    manifest.summary = json!({});
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&dir)?;
    let _ = options;
    Ok(())
}
