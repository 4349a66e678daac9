//! Single-photon-loss study: infidelity of the R_zz gate tuned to a target
//! rotation angle, as a function of the decay time T1 = 1/gamma.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use kposim_core::gate::{ModelKind, RzzContext};
use kposim_core::units::us;

use crate::config::ExperimentConfig;
use crate::csvio::CsvTable;
use crate::manifest::{ConvergenceEvidence, RunManifest};
use crate::{CliError, CliResult};

use super::{ensure_output_dir, resolved_to_json, thread_pool, RunOptions};

/// Bisection tolerance on the pre-tuned rotation angle (radians).
const THETA_TOL: f64 = 1e-3;

/// Certification abort threshold on the infidelity of the re-run point.
const CERTIFY_THRESHOLD: f64 = 1e-3;

/// Bisect the gate amplitude so the loss-free rotation angle hits the
/// target. Theta is continuous and increasing in p_g0 over the sweep range.
fn tune_gate_amplitude(ctx: &RzzContext, p_max: f64, theta_target: f64) -> CliResult<(f64, f64)> {
    let theta_hi = ctx.run_gate(p_max)?.theta;
    if theta_hi < theta_target {
        return Err(CliError::Convergence(format!(
            "Theta({:.3}K) = {theta_hi:.4} rad does not reach the target {theta_target:.4}; \
             raise gate.p_g0_over_K",
            p_max / ctx.resolved().kerr
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = p_max;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..60 {
        mid = 0.5 * (lo + hi);
        let theta = ctx.run_gate(mid)?.theta;
        if (theta - theta_target).abs() <= THETA_TOL {
            return Ok((mid, theta));
        }
        if theta < theta_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = ctx.run_gate(mid)?.theta;
    if (theta - theta_target).abs() <= THETA_TOL {
        Ok((mid, theta))
    } else {
        Err(CliError::Convergence(format!(
            "bisection did not converge: Theta = {theta:.6} vs target {theta_target:.6}"
        )))
    }
}

pub fn run_loss_sweep(
    config: ExperimentConfig,
    options: &RunOptions,
    started: Instant,
) -> CliResult<()> {
    if config.model_kind() != ModelKind::Simple {
        return Err(CliError::Config(
            "the loss study uses the simple model; set experiment.model = \"simple\"".into(),
        ));
    }
    let loss = config
        .loss
        .as_ref()
        .ok_or_else(|| CliError::Config("loss-sweep needs a [loss] block".into()))?;
    let t1_grid_us = loss.t1_grid_us()?;
    let theta_target = loss.theta_target_rad.unwrap_or(PI / 2.0);

    let setup = config.to_rzz_setup()?;
    let p_max_over_k = config.gate.as_ref().expect("validated").p_g0_over_k;
    eprintln!(
        "loss-sweep: tuning p_g0 for Theta = {theta_target:.4} rad, then {} T1 points",
        t1_grid_us.len()
    );
    let ctx = RzzContext::prepare(setup)?;
    let kerr = ctx.resolved().kerr;

    let tune_started = Instant::now();
    let (p_star, theta_star) = tune_gate_amplitude(&ctx, p_max_over_k * kerr, theta_target)?;
    eprintln!(
        "loss-sweep: p_g0 = {:.4} K gives Theta = {:.6} rad (target {:.6}, {:.1?})",
        p_star / kerr,
        theta_star,
        theta_target,
        tune_started.elapsed()
    );

    // gamma = 0 consistency row first, then the T1 grid (gamma = 1/T1).
    let gamma0 = ctx.run_gate(p_star)?;
    eprintln!(
        "loss-sweep: gamma = 0 row: infidelity = {:.3e}",
        1.0 - gamma0.fidelity
    );

    let pool = thread_pool(options.workers)?;
    let rows: Vec<(f64, f64, f64)> = pool.install(|| {
        t1_grid_us
            .par_iter()
            .map(|&t1| {
                let gamma = 1.0 / us(t1);
                let out = ctx.run_gate_lossy(p_star, gamma)?;
                let infidelity = 1.0 - out.fidelity;
                eprintln!(
                    "loss-sweep: T1 = {t1:.3} us  1-F = {infidelity:.5}  Theta = {:+.5}",
                    out.theta
                );
                Ok((t1, infidelity, out.theta))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut table = CsvTable::new(&["T1_us", "infidelity"]);
    table.push(vec![f64::INFINITY, 1.0 - gamma0.fidelity]);
    for (t1, infidelity, _) in &rows {
        table.push(vec![*t1, *infidelity]);
    }

    // Infidelity should fall monotonically with T1.
    let mut monotone = true;
    let mut by_t1 = rows.clone();
    by_t1.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite T1"));
    for pair in by_t1.windows(2) {
        if pair[1].1 > pair[0].1 + 1e-9 {
            monotone = false;
        }
    }
    if !monotone {
        eprintln!("warning: infidelity is not monotone in T1");
    }

    let convergence = if config.solver.certify {
        let (&t1_ref, _, _) = by_t1
            .first()
            .map(|(a, b, c)| (a, b, c))
            .expect("non-empty grid");
        let base = by_t1[0].1;
        let gamma = 1.0 / us(t1_ref);
        let mut half_setup = ctx.setup().clone();
        half_setup.settings.rel_tol /= 2.0;
        half_setup.settings.abs_tol /= 2.0;
        let half_ctx = RzzContext::prepare(half_setup)?;
        let half = 1.0 - half_ctx.run_gate_lossy(p_star, gamma)?.fidelity;
        let mut bump_setup = ctx.setup().clone();
        bump_setup.fock_dim = Some(ctx.resolved().fock_dim + 8);
        let bump_ctx = RzzContext::prepare(bump_setup)?;
        let bumped = 1.0 - bump_ctx.run_gate_lossy(p_star, gamma)?.fidelity;
        let half_delta = (half - base).abs();
        let bump_delta = (bumped - base).abs();
        eprintln!(
            "loss-sweep: certification deltas at T1 = {t1_ref} us: \
             half-tolerance {half_delta:.2e}, Fock +8 {bump_delta:.2e}"
        );
        let evidence = ConvergenceEvidence {
            half_tolerance_delta: half_delta,
            fock_bump_delta: bump_delta,
            threshold: CERTIFY_THRESHOLD,
        };
        if half_delta > CERTIFY_THRESHOLD || bump_delta > CERTIFY_THRESHOLD {
            return Err(CliError::Convergence(format!(
                "loss sweep failed certification: half-tolerance delta {half_delta:.3e}, \
                 Fock-bump delta {bump_delta:.3e}, threshold {CERTIFY_THRESHOLD:.1e}"
            )));
        }
        Some(evidence)
    } else {
        None
    };

    let dir = ensure_output_dir(&config)?;
    let csv_path = dir.join("loss_sweep.csv");
    table.write(&csv_path)?;
    if options.plot {
        crate::svg::plot(
            &table,
            "R_zz infidelity vs decay time",
            true,
            true,
            &dir.join("loss_sweep.svg"),
        )?;
    }

    let mut manifest = RunManifest::new("loss-sweep", config);
    manifest.resolved = resolved_to_json(ctx.resolved());
    manifest.summary = json!({
        "p_star_over_K": p_star / kerr,
        "theta_at_p_star_rad": theta_star,
        "theta_target_rad": theta_target,
        "gamma0_infidelity": 1.0 - gamma0.fidelity,
        "monotone_in_T1": monotone,
    });
    manifest.outputs = vec!["loss_sweep.csv".into()];
    manifest.convergence = convergence;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&dir)?;
    eprintln!("loss-sweep: wrote {}", csv_path.display());
    Ok(())
}
