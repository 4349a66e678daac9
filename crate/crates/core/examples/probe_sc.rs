//! Quick look at the SC-model R_zz gate at paper parameters.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use kposim_core::gate::{CouplingSpec, ModelKind, RzzContext, RzzSetup};
use kposim_core::params::{DriveKind, KpoParams};
use kposim_core::units::{ghz, to_ghz};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dim: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let tol: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1e-8);
    let drive = match args.get(3).map(|s| s.as_str()) {
        Some("difference") => DriveKind::Difference,
        _ => DriveKind::Sum,
    };
    let p_over_k_list: Vec<f64> = args
        .get(4)
        .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![5.0]);

    let kpo1 = KpoParams::from_omega(ghz(0.3), ghz(10.0), 5, FRAC_PI_4).unwrap();
    let kpo2 = KpoParams::from_omega(ghz(0.3), ghz(11.0), 5, FRAC_PI_4).unwrap();
    let mut setup = RzzSetup::new(ModelKind::Sc, drive, kpo1, kpo2);
    setup.coupling = CouplingSpec::TargetG(ghz(0.010));
    setup.fock_dim = Some(dim);
    setup.settings = setup.settings.with_tolerance(tol);

    let t0 = Instant::now();
    let ctx = RzzContext::prepare(setup).unwrap();
    let r = ctx.resolved();
    println!(
        "prepare: {:.2?}  D = {}  tol = {tol:.1e}  drive = {drive:?}",
        t0.elapsed(),
        r.fock_dim
    );
    println!(
        "  omega~1/2pi = {:.6} GHz  omega~2/2pi = {:.6} GHz",
        to_ghz(r.omega_tilde1.unwrap()),
        to_ghz(r.omega_tilde2.unwrap())
    );
    println!(
        "  delta_p1 = {:.6}  delta_p2 = {:.6}  omega_gate/2pi = {:.6} GHz",
        r.delta_p1.unwrap(),
        r.delta_p2.unwrap(),
        to_ghz(r.omega_gate.unwrap())
    );

    let kerr = r.kerr;
    for &x in &p_over_k_list {
        let t0 = Instant::now();
        let out = ctx.run_gate(x * kerr).unwrap();
        println!(
            "p_g0/K = {:5.2}  Theta = {:+.5} rad ({:+.4} pi)  F = {:.6}  leak = {:.2e}  steps = {}  [{:?}]",
            x,
            out.theta,
            out.theta / std::f64::consts::PI,
            out.fidelity,
            out.leakage,
            out.diagnostics.solver.steps_accepted,
            t0.elapsed()
        );
    }
}
