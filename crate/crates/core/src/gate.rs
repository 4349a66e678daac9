//! The R_zz gate experiment.
//!
//! Protocol: prepare the equal cat superposition
//! |psi(0)> = N0 (|psi_even> + |psi_odd>), propagate it under the model with
//! the gate pulse, and compare against the gate-free reference frame: with
//! Psi_even/odd = U_0(T_g) psi_even/odd the projections
//! alpha_1 = <Psi_even|psi(T_g)>, alpha_2 = <Psi_odd|psi(T_g)> define the
//! rotation angle Theta = arg(alpha_2) - arg(alpha_1) and the gate fidelity
//! F = |<psi_ideal(Theta)|psi(T_g)>|² with
//! |psi_ideal(Theta)> = N1 (|Psi_even> + e^{i Theta} |Psi_odd>).
//!
//! The reference pair is Gram–Schmidt orthonormalized before projection (the
//! raw overlap is below 1e-3 for alpha = 2), which makes
//! |alpha_1|² + |alpha_2|² + leakage an exact decomposition of the final
//! norm. With single-photon loss the final density matrix is projected the
//! same way, with Theta taken from the phase of the <Psi_odd|rho|Psi_even>
//! coherence and F = <psi_ideal|rho|psi_ideal>.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::dynamics::{
    lindblad_propagate, reference_propagate, schrodinger_propagate, SolverSettings, SolverStats,
};
use crate::error::{Error, Result};
use crate::fock::{
    cat_pair_states, coherent_tail_mass, fock_dim_for_amplitude, DensityMatrix, HilbertSpace,
    StateVector,
};
use crate::hamiltonian::{
    build_sc_two, build_simple_two, build_simple_two_diff, calibrate_resonance,
    sc_static_hamiltonian, sc_two_effective_params, FluxTone, TimeDependentHamiltonian,
};
use crate::params::{
    delta_for_pump, delta_g_peak, kerr_coefficient, CouplingParams, DriveKind, GatePulseParams,
    KpoParams, SimpleModelParams,
};

/// Wrap an angle to (-pi, pi], ties at -pi mapped to +pi.
pub fn wrap_angle(x: f64) -> f64 {
    let tau = 2.0 * PI;
    let mut t = x % tau;
    if t > PI {
        t -= tau;
    } else if t <= -PI {
        t += tau;
    }
    t
}

/// Outcome of one R_zz run.
#[derive(Debug, Clone)]
pub struct GateOutcome {
    /// Rotation angle, wrapped to (-pi, pi].
    pub theta: f64,
    /// Gate fidelity in [0, 1 + 1e-9].
    pub fidelity: f64,
    /// Projection onto the propagated even cat.
    pub alpha1: C64,
    /// Projection onto the propagated odd cat.
    pub alpha2: C64,
    /// 1 - |alpha1|² - |alpha2|² (or the trace analogue for lossy runs).
    pub leakage: f64,
    pub diagnostics: GateDiagnostics,
}

#[derive(Debug, Clone, Default)]
pub struct GateDiagnostics {
    pub solver: SolverStats,
    /// |norm - 1| (pure) or |trace - 1| (lossy) of the final state.
    pub norm_drift: f64,
    /// Truncated probability mass of the initial coherent components.
    pub coherent_tail: f64,
    /// |<psi_even|psi_odd>| before orthonormalization.
    pub raw_pair_overlap: f64,
}

/// The initial state N0 (|psi_even> + |psi_odd>).
pub fn prepare_initial(space: &HilbertSpace, alpha: f64) -> Result<StateVector> {
    let (even, odd) = cat_pair_states(space, alpha)?;
    Ok(even.add(&odd)?.normalized())
}

/// Gram–Schmidt orthonormalization of the reference pair.
pub fn orthonormalize_pair(
    even: &StateVector,
    odd: &StateVector,
) -> Result<(StateVector, StateVector)> {
    let e = even.clone().normalized();
    let overlap = e.inner(odd)?;
    let o = odd.sub(&e.scaled(overlap))?.normalized();
    Ok((e, o))
}

/// |psi_ideal(Theta)> = N1 (|even> + e^{i Theta} |odd>), valid for a
/// generally non-orthogonal pair (N1 from the actual Gram matrix).
pub fn ideal_target(theta: f64, even: &StateVector, odd: &StateVector) -> Result<StateVector> {
    even.add(&odd.scaled(C64::from_polar(1.0, theta)))
        .map(StateVector::normalized)
}

/// Angle/fidelity extraction for a pure final state. The reference pair is
/// orthonormalized internally.
pub fn extract_angle_and_fidelity(
    psi_final: &StateVector,
    ref_even: &StateVector,
    ref_odd: &StateVector,
) -> Result<GateOutcome> {
    let (e, o) = orthonormalize_pair(ref_even, ref_odd)?;
    let alpha1 = e.inner(psi_final)?;
    let alpha2 = o.inner(psi_final)?;
    if alpha1.norm() < 1e-6 {
        return Err(Error::PhaseUndefined {
            magnitude: alpha1.norm(),
        });
    }
    let theta = wrap_angle(alpha2.arg() - alpha1.arg());
    let ideal = ideal_target(theta, &e, &o)?;
    let fidelity = ideal.inner(psi_final)?.norm_sqr();
    let norm_sq = psi_final.norm().powi(2);
    let leakage = norm_sq - alpha1.norm_sqr() - alpha2.norm_sqr();
    Ok(GateOutcome {
        theta,
        fidelity,
        alpha1,
        alpha2,
        leakage,
        diagnostics: GateDiagnostics {
            raw_pair_overlap: ref_even.clone().normalized().inner(ref_odd)?.norm(),
            ..Default::default()
        },
    })
}

/// F = <psi_ideal|rho|psi_ideal>, clamped to [0, 1 + 1e-9].
pub fn fidelity_mixed(rho: &DensityMatrix, psi_ideal: &StateVector) -> Result<f64> {
    let f = rho.sandwich(psi_ideal)?.re;
    Ok(f.clamp(0.0, 1.0 + 1e-9))
}

/// Angle/fidelity extraction for a lossy final state: Theta from the
/// coherence <odd|rho|even>, F from the ideal-target sandwich.
pub fn extract_mixed(
    rho_final: &DensityMatrix,
    ref_even: &StateVector,
    ref_odd: &StateVector,
) -> Result<GateOutcome> {
    let (e, o) = orthonormalize_pair(ref_even, ref_odd)?;
    let coherence = rho_final.coherence(&o, &e)?;
    if coherence.norm() < 1e-12 {
        return Err(Error::PhaseUndefined {
            magnitude: coherence.norm(),
        });
    }
    let theta = wrap_angle(coherence.arg());
    let ideal = ideal_target(theta, &e, &o)?;
    let fidelity = fidelity_mixed(rho_final, &ideal)?;
    let pop_e = rho_final.sandwich(&e)?.re;
    let pop_o = rho_final.sandwich(&o)?.re;
    let trace = rho_final.trace().re;
    Ok(GateOutcome {
        theta,
        fidelity,
        alpha1: C64::new(pop_e.max(0.0).sqrt(), 0.0),
        alpha2: C64::from_polar(pop_o.max(0.0).sqrt(), theta),
        leakage: trace - pop_e - pop_o,
        diagnostics: GateDiagnostics {
            raw_pair_overlap: ref_even.clone().normalized().inner(ref_odd)?.norm(),
            ..Default::default()
        },
    })
}

/// Which Hamiltonian family to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Rotating-frame simple model.
    Simple,
    /// Lab-frame superconducting-circuit model.
    Sc,
}

/// How the SC pump frequencies are chosen.
#[derive(Debug, Clone, Copy)]
pub enum PumpFreqMode {
    /// omega_pj = 2 omega~_j from diagonalizing the static per-KPO SC
    /// Hamiltonian (coupling off, renormalized charging energies).
    AutoCalibrated,
    /// Explicit pump frequencies (rad/ns).
    Explicit { omega_p1: f64, omega_p2: f64 },
}

/// Full description of one R_zz experiment.
#[derive(Debug, Clone)]
pub struct RzzSetup {
    pub model: ModelKind,
    pub drive: DriveKind,
    pub kpo1: KpoParams,
    pub kpo2: KpoParams,
    /// Pump amplitude as a multiple of K (P = x K, alpha = sqrt(x)).
    pub p_over_k: f64,
    /// Exactly one of the two ways to specify the coupler.
    pub coupling: CouplingSpec,
    /// Gate duration (ns).
    pub t_g: f64,
    /// Rise-shape parameter of the gate pulse.
    pub beta: f64,
    /// Per-mode Fock dimension; None applies the truncation rule.
    pub fock_dim: Option<usize>,
    pub pump_freq_mode: PumpFreqMode,
    pub settings: SolverSettings,
}

#[derive(Debug, Clone, Copy)]
pub enum CouplingSpec {
    TargetG(f64),
    ChargingEnergy(f64),
}

impl RzzSetup {
    /// Paper-style setup from the two circuits and a target g.
    pub fn new(model: ModelKind, drive: DriveKind, kpo1: KpoParams, kpo2: KpoParams) -> Self {
        Self {
            model,
            drive,
            kpo1,
            kpo2,
            p_over_k: 4.0,
            coupling: CouplingSpec::TargetG(0.0),
            t_g: 40.0,
            beta: 3.0,
            fock_dim: None,
            pump_freq_mode: PumpFreqMode::AutoCalibrated,
            settings: SolverSettings::simple_model(),
        }
    }
}

/// Parameters derived while preparing a run; everything an experiment
/// manifest needs to reproduce it.
#[derive(Debug, Clone)]
pub struct ResolvedParams {
    pub kerr: f64,
    pub pump: f64,
    pub alpha: f64,
    pub g: f64,
    pub e_c0: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub delta12: f64,
    pub fock_dim: usize,
    /// Flux pump amplitudes (SC model only).
    pub delta_p1: Option<f64>,
    pub delta_p2: Option<f64>,
    /// Calibrated single-photon resonances (SC model only).
    pub omega_tilde1: Option<f64>,
    pub omega_tilde2: Option<f64>,
    /// Pump and gate-drive carriers (SC model only).
    pub omega_p1: Option<f64>,
    pub omega_p2: Option<f64>,
    pub omega_gate: Option<f64>,
}

/// Derive every parameter of a run without propagating anything: the simple
/// model parameters, the coupler inversion, and (for the SC model) the
/// calibrated resonances, pump flux amplitudes and drive carriers.
pub fn resolve_rzz_params(setup: &RzzSetup) -> Result<ResolvedParams> {
    if setup.p_over_k <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "P/K = {} <= 0",
            setup.p_over_k
        )));
    }
    let kerr = kerr_coefficient(&setup.kpo1);
    let pump = setup.p_over_k * kerr;
    let alpha = (pump / kerr).sqrt();

    let coupling = match setup.coupling {
        CouplingSpec::TargetG(g) => CouplingParams::from_g(g, &setup.kpo1, &setup.kpo2)?,
        CouplingSpec::ChargingEnergy(e_c0) => CouplingParams::from_e_c0(e_c0)?,
    };
    let g = coupling.g(&setup.kpo1, &setup.kpo2);
    let omega1 = crate::params::omega_from_circuit(&setup.kpo1);
    let omega2 = crate::params::omega_from_circuit(&setup.kpo2);
    let delta12 = omega1 - omega2;

    let dim = setup.fock_dim.unwrap_or_else(|| fock_dim_for_amplitude(alpha));

    let mut resolved = ResolvedParams {
        kerr,
        pump,
        alpha,
        g,
        e_c0: coupling.e_c0,
        omega1,
        omega2,
        delta12,
        fock_dim: dim,
        delta_p1: None,
        delta_p2: None,
        omega_tilde1: None,
        omega_tilde2: None,
        omega_p1: None,
        omega_p2: None,
        omega_gate: None,
    };

    if setup.model == ModelKind::Sc {
        let (p1_eff, p2_eff) = sc_two_effective_params(&setup.kpo1, &setup.kpo2, &coupling)?;
        let single = HilbertSpace::single(dim)?;
        let omega_t1 = calibrate_resonance(&sc_static_hamiltonian(&single, &p1_eff)?)
            .map_err(|e| e.with_context("KPO1 resonance calibration"))?;
        let omega_t2 = calibrate_resonance(&sc_static_hamiltonian(&single, &p2_eff)?)
            .map_err(|e| e.with_context("KPO2 resonance calibration"))?;
        let (omega_p1, omega_p2) = match setup.pump_freq_mode {
            PumpFreqMode::AutoCalibrated => (2.0 * omega_t1, 2.0 * omega_t2),
            PumpFreqMode::Explicit { omega_p1, omega_p2 } => (omega_p1, omega_p2),
        };
        let omega_gate = match setup.drive {
            DriveKind::Sum => (omega_p1 + omega_p2) / 2.0,
            DriveKind::Difference => ((omega_p1 - omega_p2) / 2.0).abs(),
        };
        resolved.delta_p1 = Some(delta_for_pump(pump, &p1_eff)?);
        resolved.delta_p2 = Some(delta_for_pump(pump, &p2_eff)?);
        resolved.omega_tilde1 = Some(omega_t1);
        resolved.omega_tilde2 = Some(omega_t2);
        resolved.omega_p1 = Some(omega_p1);
        resolved.omega_p2 = Some(omega_p2);
        resolved.omega_gate = Some(omega_gate);
    }
    Ok(resolved)
}

/// Prepared context for a family of runs sharing everything except the gate
/// pulse amplitude: the Fock space, the initial state, and the propagated
/// reference pair (which does not depend on p_g0).
pub struct RzzContext {
    setup: RzzSetup,
    resolved: ResolvedParams,
    space: HilbertSpace,
    psi0: StateVector,
    ref_even: StateVector,
    ref_odd: StateVector,
    energy_ref: f64,
    coherent_tail: f64,
    raw_pair_overlap: f64,
}

impl RzzContext {
    pub fn prepare(setup: RzzSetup) -> Result<Self> {
        setup.settings.validate()?;
        let resolved = resolve_rzz_params(&setup)?;
        let dim = resolved.fock_dim;
        let alpha = resolved.alpha;
        let space = HilbertSpace::two(dim, dim)?;

        let (even, odd) = cat_pair_states(&space, alpha)?;
        let psi0 = even.add(&odd)?.normalized();
        let a = C64::new(alpha, 0.0);
        let coherent_tail = coherent_tail_mass(&space, &[a, a]);
        let raw_pair_overlap = even.inner(&odd)?.norm();

        let mut ctx = Self {
            setup,
            resolved,
            space,
            psi0,
            ref_even: even,
            ref_odd: odd,
            energy_ref: 0.0,
            coherent_tail,
            raw_pair_overlap,
        };

        // Reference propagation: U_0 = same model with the gate pulse off.
        let mut h_ref = ctx.build_hamiltonian(0.0)?;
        ctx.energy_ref = h_ref.expectation(0.0, &ctx.psi0)?.re;
        h_ref.shift_energy(ctx.energy_ref);
        let refs = reference_propagate(
            &h_ref,
            &[ctx.ref_even.clone(), ctx.ref_odd.clone()],
            ctx.setup.t_g,
            &ctx.setup.settings,
        )?;
        let mut refs = refs.into_iter();
        ctx.ref_even = refs.next().expect("two reference states");
        ctx.ref_odd = refs.next().expect("two reference states");
        Ok(ctx)
    }

    pub fn setup(&self) -> &RzzSetup {
        &self.setup
    }

    pub fn resolved(&self) -> &ResolvedParams {
        &self.resolved
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.psi0
    }

    /// Propagated reference pair (not orthonormalized).
    pub fn reference_pair(&self) -> (&StateVector, &StateVector) {
        (&self.ref_even, &self.ref_odd)
    }

    /// Re-target the gate drive without repeating the reference propagation:
    /// the gate-free generator U_0 carries no gate tone, so it is identical
    /// for sum- and difference-frequency drives.
    pub fn with_drive(&self, drive: DriveKind) -> Result<Self> {
        let mut setup = self.setup.clone();
        setup.drive = drive;
        let mut resolved = self.resolved.clone();
        if setup.model == ModelKind::Sc {
            let (omega_p1, omega_p2) = (
                resolved.omega_p1.expect("SC resolved"),
                resolved.omega_p2.expect("SC resolved"),
            );
            resolved.omega_gate = Some(match drive {
                DriveKind::Sum => (omega_p1 + omega_p2) / 2.0,
                DriveKind::Difference => ((omega_p1 - omega_p2) / 2.0).abs(),
            });
        }
        Ok(Self {
            setup,
            resolved,
            space: self.space.clone(),
            psi0: self.psi0.clone(),
            ref_even: self.ref_even.clone(),
            ref_odd: self.ref_odd.clone(),
            energy_ref: self.energy_ref,
            coherent_tail: self.coherent_tail,
            raw_pair_overlap: self.raw_pair_overlap,
        })
    }

    fn gate_pulse(&self, p_g0: f64) -> Result<GatePulseParams> {
        let omega_d = self.resolved.omega_gate.unwrap_or(0.0);
        GatePulseParams::new(p_g0, self.setup.t_g, self.setup.beta, omega_d, self.setup.drive)
    }

    /// Build the model Hamiltonian for a given gate amplitude p_g0 (zero for
    /// the reference generator U_0).
    pub fn build_hamiltonian(&self, p_g0: f64) -> Result<TimeDependentHamiltonian> {
        let gp = self.gate_pulse(p_g0)?;
        match self.setup.model {
            ModelKind::Simple => {
                let sp = SimpleModelParams {
                    detuning: 0.0,
                    kerr: self.resolved.kerr,
                    pump: self.resolved.pump,
                    g: self.resolved.g,
                    delta12: self.resolved.delta12,
                };
                match self.setup.drive {
                    DriveKind::Sum => build_simple_two(&self.space, &sp, &gp),
                    DriveKind::Difference => build_simple_two_diff(&self.space, &sp, &gp),
                }
            }
            ModelKind::Sc => {
                let coupling = CouplingParams::from_e_c0(self.resolved.e_c0)?;
                let (p1_eff, _) =
                    sc_two_effective_params(&self.setup.kpo1, &self.setup.kpo2, &coupling)?;
                let mut tones1 = vec![FluxTone::constant(
                    self.resolved.delta_p1.expect("SC resolved"),
                    self.resolved.omega_p1.expect("SC resolved"),
                )];
                if p_g0 > 0.0 {
                    let delta_g = delta_g_peak(&gp, &p1_eff);
                    tones1.push(FluxTone::gate_pulse(
                        delta_g,
                        self.resolved.omega_gate.expect("SC resolved"),
                        self.setup.t_g,
                        self.setup.beta,
                    ));
                }
                let tones2 = vec![FluxTone::constant(
                    self.resolved.delta_p2.expect("SC resolved"),
                    self.resolved.omega_p2.expect("SC resolved"),
                )];
                build_sc_two(
                    &self.space,
                    &self.setup.kpo1,
                    &self.setup.kpo2,
                    &tones1,
                    &tones2,
                    &coupling,
                )
            }
        }
    }

    /// One pure-state gate run at gate amplitude p_g0.
    pub fn run_gate(&self, p_g0: f64) -> Result<GateOutcome> {
        let mut h = self.build_hamiltonian(p_g0)?;
        h.shift_energy(self.energy_ref);
        let quiet = SolverSettings {
            samples: 2,
            ..self.setup.settings
        };
        let (psi_final, traj) =
            schrodinger_propagate(&h, &self.psi0, 0.0, self.setup.t_g, &quiet, &[])
                .map_err(|e| e.with_context(format!("gate propagation at p_g0 = {p_g0}")))?;
        let mut outcome = extract_angle_and_fidelity(&psi_final, &self.ref_even, &self.ref_odd)?;
        outcome.diagnostics = GateDiagnostics {
            solver: traj.stats,
            norm_drift: (psi_final.norm() - 1.0).abs(),
            coherent_tail: self.coherent_tail,
            raw_pair_overlap: self.raw_pair_overlap,
        };
        Ok(outcome)
    }

    /// One lossy gate run: master equation with photon loss rate gamma on
    /// both modes.
    pub fn run_gate_lossy(&self, p_g0: f64, gamma: f64) -> Result<GateOutcome> {
        let mut h = self.build_hamiltonian(p_g0)?;
        h.shift_energy(self.energy_ref);
        let quiet = SolverSettings {
            samples: 2,
            ..self.setup.settings
        };
        let rho0 = DensityMatrix::from_pure(&self.psi0);
        let (rho_final, traj) =
            lindblad_propagate(&h, &rho0, gamma, 0.0, self.setup.t_g, &quiet, &[])
                .map_err(|e| e.with_context(format!("lossy gate propagation at p_g0 = {p_g0}")))?;
        let mut outcome = extract_mixed(&rho_final, &self.ref_even, &self.ref_odd)?;
        outcome.diagnostics = GateDiagnostics {
            solver: traj.stats,
            norm_drift: (rho_final.trace().re - 1.0).abs(),
            coherent_tail: self.coherent_tail,
            raw_pair_overlap: self.raw_pair_overlap,
        };
        Ok(outcome)
    }
}

/// Convenience single-shot R_zz run (prefer [`RzzContext`] for sweeps, which
/// shares the reference propagation across gate amplitudes).
pub fn run_rzz(setup: &RzzSetup, p_g0: f64, gamma: f64) -> Result<GateOutcome> {
    let ctx = RzzContext::prepare(setup.clone())?;
    if gamma > 0.0 {
        ctx.run_gate_lossy(p_g0, gamma)
    } else {
        ctx.run_gate(p_g0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_state;
    use crate::units::ghz;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn paper_setup(model: ModelKind, drive: DriveKind) -> RzzSetup {
        let kpo1 = KpoParams::from_omega(ghz(0.3), ghz(10.0), 5, FRAC_PI_4).unwrap();
        let kpo2 = KpoParams::from_omega(ghz(0.3), ghz(11.0), 5, FRAC_PI_4).unwrap();
        let mut setup = RzzSetup::new(model, drive, kpo1, kpo2);
        setup.coupling = CouplingSpec::TargetG(ghz(0.010));
        setup
    }

    #[test]
    fn wrap_angle_conventions() {
        assert_abs_diff_eq!(wrap_angle(0.0), 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 0.0);
        assert_abs_diff_eq!(wrap_angle(PI + 0.1), -PI + 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-PI - 0.1), PI - 0.1, epsilon = 1e-12);
    }

    #[test]
    fn prepare_initial_norm_and_overlap() {
        let space = HilbertSpace::two(24, 24).unwrap();
        let psi0 = prepare_initial(&space, 2.0).unwrap();
        assert_abs_diff_eq!(psi0.norm(), 1.0, epsilon = 1e-9);

        // Overlap with |alpha, alpha> from the analytic Gram matrix:
        // <aa|psi0> = N0 (<aa|even> + <aa|odd>) with
        // <aa|even> = (1 + s²)/sqrt(2 + 2s²), <aa|odd> = 2s/sqrt(2 + 2s²),
        // s = e^{-2 alpha²}, and N0 = 1/sqrt(2 + 2<even|odd>).
        let s = (-8.0f64).exp();
        let norm_even = (2.0 + 2.0 * s * s).sqrt();
        let norm_odd = (2.0 + 2.0 * s * s).sqrt();
        let eo = 4.0 * s / (norm_even * norm_odd);
        let n0 = 1.0 / (2.0 + 2.0 * eo).sqrt();
        let expected = n0 * ((1.0 + s * s) / norm_even + 2.0 * s / norm_odd);
        let aa = coherent_state(&space, &[c(2.0, 0.0), c(2.0, 0.0)]).unwrap();
        let got = aa.inner(&psi0).unwrap();
        assert_abs_diff_eq!(got.re, expected, epsilon = 1e-8);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn prepare_initial_sign_flip_symmetric() {
        // alpha -> -alpha on both modes permutes the four coherent
        // components among themselves, so the state is unchanged.
        let space = HilbertSpace::two(20, 20).unwrap();
        let plus = prepare_initial(&space, 1.7).unwrap();
        let minus = prepare_initial(&space, -1.7).unwrap();
        let diff = plus.sub(&minus).unwrap().norm();
        assert!(diff < 1e-12, "difference {diff}");
    }

    #[test]
    fn ideal_target_properties() {
        let space = HilbertSpace::two(20, 20).unwrap();
        let (even, odd) = cat_pair_states(&space, 2.0).unwrap();
        let (e, o) = orthonormalize_pair(&even, &odd).unwrap();

        // Theta = 0 with an orthonormal pair -> (e + o)/sqrt(2).
        let t0 = ideal_target(0.0, &e, &o).unwrap();
        let expected = e.add(&o).unwrap().scaled(c(1.0 / 2.0f64.sqrt(), 0.0));
        assert!(t0.sub(&expected).unwrap().norm() < 1e-12);

        // Theta and Theta + 2 pi agree up to global phase (here exactly).
        let a = ideal_target(1.234, &e, &o).unwrap();
        let b = ideal_target(1.234 + 2.0 * PI, &e, &o).unwrap();
        assert!(a.inner(&b).unwrap().norm() > 1.0 - 1e-12);

        // Normalized at Theta = pi/2 for the raw (non-orthogonal) pair too.
        let t = ideal_target(PI / 2.0, &even, &odd).unwrap();
        assert_abs_diff_eq!(t.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn extraction_self_consistency() {
        let space = HilbertSpace::two(16, 16).unwrap();
        let (even, odd) = cat_pair_states(&space, 1.5).unwrap();
        let (e, o) = orthonormalize_pair(&even, &odd).unwrap();
        for &theta0 in &[0.0, 0.3, -2.2, PI / 2.0] {
            let psi = ideal_target(theta0, &e, &o).unwrap();
            let out = extract_angle_and_fidelity(&psi, &even, &odd).unwrap();
            assert_abs_diff_eq!(out.theta, theta0, epsilon = 1e-9);
            assert_abs_diff_eq!(out.fidelity, 1.0, epsilon = 1e-9);
            assert!(out.leakage.abs() < 1e-9);
        }
    }

    #[test]
    fn extraction_global_phase_invariant() {
        let space = HilbertSpace::two(16, 16).unwrap();
        let (even, odd) = cat_pair_states(&space, 1.5).unwrap();
        let (e, o) = orthonormalize_pair(&even, &odd).unwrap();
        let psi = ideal_target(0.77, &e, &o).unwrap();
        let base = extract_angle_and_fidelity(&psi, &even, &odd).unwrap();
        for &chi in &[0.4, 1.9, -2.5] {
            let rotated = psi.scaled(C64::from_polar(1.0, chi));
            let out = extract_angle_and_fidelity(&rotated, &even, &odd).unwrap();
            assert_abs_diff_eq!(out.theta, base.theta, epsilon = 1e-12);
            assert_abs_diff_eq!(out.fidelity, base.fidelity, epsilon = 1e-12);
        }
    }

    #[test]
    fn extraction_decomposition_is_exact() {
        // With the orthonormalized pair, |a1|² + |a2|² + leakage = ||psi||².
        let space = HilbertSpace::two(12, 12).unwrap();
        let (even, odd) = cat_pair_states(&space, 1.2).unwrap();
        let psi = coherent_state(&space, &[c(1.3, 0.2), c(-1.1, 0.4)]).unwrap();
        let out = extract_angle_and_fidelity(&psi, &even, &odd).unwrap();
        let total = out.alpha1.norm_sqr() + out.alpha2.norm_sqr() + out.leakage;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(out.leakage >= -1e-9);
    }

    #[test]
    fn phase_undefined_reported() {
        let space = HilbertSpace::two(10, 10).unwrap();
        let (even, odd) = cat_pair_states(&space, 1.2).unwrap();
        let (_, o) = orthonormalize_pair(&even, &odd).unwrap();
        // A final state orthogonal to the even reference.
        let res = extract_angle_and_fidelity(&o, &even, &odd);
        assert!(matches!(res, Err(Error::PhaseUndefined { .. })));
    }

    #[test]
    fn fidelity_mixed_limits() {
        let space = HilbertSpace::two(6, 6).unwrap();
        let (even, odd) = cat_pair_states(&space, 1.0).unwrap();
        let (e, o) = orthonormalize_pair(&even, &odd).unwrap();
        let ideal = ideal_target(0.9, &e, &o).unwrap();

        let pure = DensityMatrix::from_pure(&ideal);
        assert_abs_diff_eq!(fidelity_mixed(&pure, &ideal).unwrap(), 1.0, epsilon = 1e-12);

        let mixed = DensityMatrix::maximally_mixed(&space);
        assert_abs_diff_eq!(
            fidelity_mixed(&mixed, &ideal).unwrap(),
            1.0 / 36.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn simple_context_zero_pulse_identity() {
        // p_g0 = 0: the main run IS the reference evolution, so Theta = 0
        // and F = 1 up to solver error.
        let mut setup = paper_setup(ModelKind::Simple, DriveKind::Sum);
        setup.fock_dim = Some(16);
        let ctx = RzzContext::prepare(setup).unwrap();
        let out = ctx.run_gate(0.0).unwrap();
        assert!(out.theta.abs() < 1e-6, "Theta = {}", out.theta);
        assert!(out.fidelity > 1.0 - 1e-6, "F = {}", out.fidelity);
        assert!(out.leakage < 1e-6);
    }

    #[test]
    fn simple_context_small_pulse_rotates() {
        let mut setup = paper_setup(ModelKind::Simple, DriveKind::Sum);
        setup.fock_dim = Some(16);
        let ctx = RzzContext::prepare(setup).unwrap();
        let kerr = ctx.resolved().kerr;
        let out = ctx.run_gate(1.0 * kerr).unwrap();
        assert!(out.theta != 0.0);
        assert!(out.fidelity > 0.99, "F = {}", out.fidelity);
        assert!(out.fidelity <= 1.0 + 1e-9);
        // Resolved parameters match the paper's table.
        assert_abs_diff_eq!(ctx.resolved().alpha, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            ctx.resolved().delta12 / ghz(1.0),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn lossy_gamma_zero_matches_pure() {
        let mut setup = paper_setup(ModelKind::Simple, DriveKind::Sum);
        setup.fock_dim = Some(12);
        setup.settings = setup.settings.with_tolerance(1e-10);
        let ctx = RzzContext::prepare(setup).unwrap();
        let kerr = ctx.resolved().kerr;
        let pure = ctx.run_gate(2.0 * kerr).unwrap();
        let lossy = ctx.run_gate_lossy(2.0 * kerr, 0.0).unwrap();
        assert!(
            (pure.fidelity - lossy.fidelity).abs() < 1e-7,
            "pure F = {}, gamma=0 F = {}",
            pure.fidelity,
            lossy.fidelity
        );
        assert!((pure.theta - lossy.theta).abs() < 1e-6);
    }

    #[test]
    fn coupling_spec_validation() {
        let mut setup = paper_setup(ModelKind::Simple, DriveKind::Sum);
        setup.coupling = CouplingSpec::TargetG(-1.0);
        assert!(RzzContext::prepare(setup).is_err());
    }
}
