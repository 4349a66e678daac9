//! R_zz gate-amplitude sweep: rotation angle, fidelity and leakage as the
//! gate pulse peak is swept from zero.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use kposim_core::gate::{GateOutcome, RzzContext};

use crate::config::ExperimentConfig;
use crate::csvio::CsvTable;
use crate::manifest::{ConvergenceEvidence, RunManifest};
use crate::{CliError, CliResult};

use super::{ensure_output_dir, resolved_to_json, thread_pool, RunOptions};

/// Certification abort threshold on |dF| and |dTheta| of the largest-p_g0
/// point under halved tolerances or a +8 Fock bump.
const CERTIFY_THRESHOLD: f64 = 2e-5;

pub fn run_rzz_sweep(
    config: ExperimentConfig,
    options: &RunOptions,
    started: Instant,
) -> CliResult<()> {
    let setup = config.to_rzz_setup()?;
    let points = config.sweep.points;
    if points < 2 {
        return Err(CliError::Config("sweep.points must be >= 2".into()));
    }
    let p_max_over_k = config
        .gate
        .as_ref()
        .expect("validated in to_rzz_setup")
        .p_g0_over_k;

    eprintln!(
        "rzz-sweep: model = {:?}, drive = {:?}, {} points over p_g0/K in [0, {}]",
        setup.model, setup.drive, points, p_max_over_k
    );
    let prep_started = Instant::now();
    let ctx = RzzContext::prepare(setup)?;
    eprintln!(
        "rzz-sweep: prepared references in {:.1?} (D = {}, alpha = {:.3})",
        prep_started.elapsed(),
        ctx.resolved().fock_dim,
        ctx.resolved().alpha
    );

    let kerr = ctx.resolved().kerr;
    let grid: Vec<f64> = (0..points)
        .map(|i| p_max_over_k * i as f64 / (points - 1) as f64)
        .collect();

    let pool = thread_pool(options.workers)?;
    let outcomes: Vec<GateOutcome> = pool.install(|| {
        grid.par_iter()
            .map(|&x| {
                let out = ctx.run_gate(x * kerr)?;
                eprintln!(
                    "rzz-sweep: p_g0/K = {x:.3}  Theta = {:+.4} rad  F = {:.6}  leakage = {:.2e}",
                    out.theta, out.fidelity, out.leakage
                );
                Ok(out)
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut table = CsvTable::new(&["p_g0_over_K", "Theta_rad", "F", "leakage"]);
    for (x, out) in grid.iter().zip(outcomes.iter()) {
        table.push(vec![*x, out.theta, out.fidelity, out.leakage]);
    }

    let theta_max = outcomes.iter().fold(0.0f64, |m, o| m.max(o.theta));
    let spans_half_pi = theta_max >= PI / 2.0;
    let min_f_in_span = outcomes
        .iter()
        .filter(|o| o.theta <= PI / 2.0 + 1e-12)
        .fold(1.0f64, |m, o| m.min(o.fidelity));
    let max_leakage = outcomes.iter().fold(0.0f64, |m, o| m.max(o.leakage));
    eprintln!(
        "rzz-sweep: Theta spans [0, {:.4}] rad ({}reaching pi/2); \
         min F over Theta <= pi/2: {:.6}; max leakage {:.2e}",
        theta_max,
        if spans_half_pi { "" } else { "NOT " },
        min_f_in_span,
        max_leakage
    );

    // Certification: repeat the largest-amplitude point with halved
    // tolerances and with every Fock dimension bumped by 8.
    let convergence = if config.solver.certify {
        let p_top = p_max_over_k * kerr;
        let base = outcomes.last().expect("non-empty sweep");
        let mut half_setup = ctx.setup().clone();
        half_setup.settings.rel_tol /= 2.0;
        half_setup.settings.abs_tol /= 2.0;
        let half = RzzContext::prepare(half_setup)?.run_gate(p_top)?;
        let mut bump_setup = ctx.setup().clone();
        bump_setup.fock_dim = Some(ctx.resolved().fock_dim + 8);
        let bumped = RzzContext::prepare(bump_setup)?.run_gate(p_top)?;
        let half_delta = (half.fidelity - base.fidelity)
            .abs()
            .max((half.theta - base.theta).abs());
        let bump_delta = (bumped.fidelity - base.fidelity)
            .abs()
            .max((bumped.theta - base.theta).abs());
        eprintln!(
            "rzz-sweep: certification deltas: half-tolerance {half_delta:.2e}, \
             Fock +8 {bump_delta:.2e}"
        );
        let evidence = ConvergenceEvidence {
            half_tolerance_delta: half_delta,
            fock_bump_delta: bump_delta,
            threshold: CERTIFY_THRESHOLD,
        };
        if half_delta > CERTIFY_THRESHOLD || bump_delta > CERTIFY_THRESHOLD {
            return Err(CliError::Convergence(format!(
                "sweep failed certification: half-tolerance delta {half_delta:.3e}, \
                 Fock-bump delta {bump_delta:.3e}, threshold {CERTIFY_THRESHOLD:.1e}"
            )));
        }
        Some(evidence)
    } else {
        None
    };

    let dir = ensure_output_dir(&config)?;
    let csv_path = dir.join("rzz_sweep.csv");
    table.write(&csv_path)?;
    if options.plot {
        crate::svg::plot(
            &table,
            "R_zz sweep: rotation angle, fidelity, leakage",
            false,
            false,
            &dir.join("rzz_sweep.svg"),
        )?;
    }

    let mut manifest = RunManifest::new("rzz-sweep", config);
    manifest.resolved = resolved_to_json(ctx.resolved());
    manifest.summary = json!({
        "theta_max_rad": theta_max,
        "spans_half_pi": spans_half_pi,
        "min_F_theta_le_half_pi": min_f_in_span,
        "max_leakage": max_leakage,
        "first_row_theta": outcomes[0].theta,
        "first_row_F": outcomes[0].fidelity,
    });
    manifest.outputs = vec!["rzz_sweep.csv".into()];
    manifest.convergence = convergence;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&dir)?;
    eprintln!("rzz-sweep: wrote {}", csv_path.display());
    Ok(())
}
