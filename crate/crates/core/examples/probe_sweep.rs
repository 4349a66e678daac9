//! Quick look at the simple-model R_zz sweep at paper parameters.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use kposim_core::gate::{CouplingSpec, ModelKind, RzzContext, RzzSetup};
use kposim_core::params::{DriveKind, KpoParams};
use kposim_core::units::ghz;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dim: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(24);
    let tol: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1e-9);
    let max_over_k: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let points: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(10);

    let kpo1 = KpoParams::from_omega(ghz(0.3), ghz(10.0), 5, FRAC_PI_4).unwrap();
    let kpo2 = KpoParams::from_omega(ghz(0.3), ghz(11.0), 5, FRAC_PI_4).unwrap();
    let mut setup = RzzSetup::new(ModelKind::Simple, DriveKind::Sum, kpo1, kpo2);
    setup.coupling = CouplingSpec::TargetG(ghz(0.010));
    setup.fock_dim = Some(dim);
    setup.settings = setup.settings.with_tolerance(tol);

    let t0 = Instant::now();
    let ctx = RzzContext::prepare(setup).unwrap();
    println!(
        "prepare: {:.2?} (D = {}, tol = {tol:.1e}, alpha = {}, g/2pi = {:.4} GHz)",
        t0.elapsed(),
        ctx.resolved().fock_dim,
        ctx.resolved().alpha,
        ctx.resolved().g / std::f64::consts::TAU
    );

    let kerr = ctx.resolved().kerr;
    for i in 0..=points {
        let p = max_over_k * kerr * i as f64 / points as f64;
        let t0 = Instant::now();
        let out = ctx.run_gate(p).unwrap();
        println!(
            "p_g0/K = {:5.2}  Theta = {:+.5} rad ({:+.4} pi)  F = {:.6}  leak = {:.2e}  steps = {}  [{:?}]",
            p / kerr,
            out.theta,
            out.theta / std::f64::consts::PI,
            out.fidelity,
            out.leakage,
            out.diagnostics.solver.steps_accepted,
            t0.elapsed()
        );
    }
}
