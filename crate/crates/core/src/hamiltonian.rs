//! Time-dependent Hamiltonians for the simple and SC models.
//!
//! A [`TimeDependentHamiltonian`] is a list of (static matrix, scalar
//! coefficient function of t) pairs, so integrators never rebuild matrices.
//! Hermiticity at every t is guaranteed by construction: each part is either
//! a Hermitian matrix with a real coefficient or comes paired with its
//! adjoint carrying the conjugate coefficient.
//!
//! Models built here (ħ = 1, angular frequencies in rad/ns):
//!
//! - simple single KPO:   Delta a†a - (K/2) a†²a² + (P/2)(a†² + a²)
//! - simple two KPOs:     sum of per-KPO terms, the beam-splitter coupling
//!   g(a₁a₂†e^{-i Δ12 t} + h.c.) and the gate term
//!   (p_g(t)/2)(a₁²e^{-i Δ12 t} + h.c.) for the sum drive or
//!   (p_g(t)/2) cos(Δ12 t) a₁†a₁ for the difference drive.
//! - SC single KPO (lab frame):
//!   ω a†a - N E_J cos(θ0 - m(t)) cos(φ̂/N) - N E~_J φ̂²/(2N²),
//!   with m(t) the flux modulation (pump and/or gate tones).
//! - SC two KPOs: per-KPO terms as above with charging energies renormalized
//!   by the coupling capacitor, plus the charge-charge coupling
//!   (16 E_C1 E_C2 / ΣE_C) n̂₁n̂₂.
//!
//! The SC cosine factor is expanded as
//! cos(θ0 - m(t)) = cos θ0 cos m(t) + sin θ0 sin m(t), exactly; cos(φ̂/N) is
//! computed once by eigendecomposition and reused, so the time dependence is
//! a scalar coefficient on a fixed matrix.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, charge_phase_operators, number, operator_function, HilbertSpace, OperatorMatrix,
    StateVector,
};
use crate::params::{
    omega_from_circuit, pulse_envelope, CouplingParams, DriveKind, GatePulseParams, KpoParams,
    SimpleModelParams,
};

/// Scalar coefficient of one Hamiltonian part.
pub type CoeffFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

pub struct HamiltonianPart {
    pub label: String,
    pub matrix: OperatorMatrix,
    pub coeff: CoeffFn,
}

/// H(t) = sum_k c_k(t) A_k, with optional bookkeeping of a constant energy
/// shift and of the fastest drive carrier (used to cap integrator steps).
pub struct TimeDependentHamiltonian {
    space: HilbertSpace,
    parts: Vec<HamiltonianPart>,
    max_carrier: f64,
    energy_offset: f64,
}

impl TimeDependentHamiltonian {
    fn new(space: HilbertSpace) -> Self {
        Self {
            space,
            parts: Vec::new(),
            max_carrier: 0.0,
            energy_offset: 0.0,
        }
    }

    fn push_static(&mut self, label: &str, matrix: OperatorMatrix) {
        self.push(label, matrix, Arc::new(|_| C64::new(1.0, 0.0)));
    }

    fn push(&mut self, label: &str, matrix: OperatorMatrix, coeff: CoeffFn) {
        debug_assert_eq!(matrix.space(), &self.space);
        self.parts.push(HamiltonianPart {
            label: label.to_string(),
            matrix,
            coeff,
        });
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn parts(&self) -> &[HamiltonianPart] {
        &self.parts
    }

    /// Fastest drive carrier (rad/ns); zero when every coefficient is
    /// constant.
    pub fn max_carrier(&self) -> f64 {
        self.max_carrier
    }

    /// Constant already subtracted from the static part.
    pub fn energy_offset(&self) -> f64 {
        self.energy_offset
    }

    /// Evaluate the scalar coefficient of the part with this label.
    pub fn coefficient(&self, label: &str, t: f64) -> Option<C64> {
        self.parts
            .iter()
            .find(|p| p.label == label)
            .map(|p| (p.coeff)(t))
    }

    /// Dense H(t).
    pub fn assemble(&self, t: f64) -> OperatorMatrix {
        let mut out = OperatorMatrix::zeros(&self.space);
        for part in &self.parts {
            let c = (part.coeff)(t);
            if c != C64::new(0.0, 0.0) {
                out = out.add(&part.matrix.scaled(c)).expect("same space");
            }
        }
        out
    }

    /// <psi|H(t)|psi> without assembling the full matrix.
    pub fn expectation(&self, t: f64, psi: &StateVector) -> Result<C64> {
        let mut total = C64::new(0.0, 0.0);
        for part in &self.parts {
            let c = (part.coeff)(t);
            if c != C64::new(0.0, 0.0) {
                total += c * part.matrix.expectation(psi)?;
            }
        }
        Ok(total)
    }

    /// Subtract `e_ref * I` from the Hamiltonian (a physically unobservable
    /// constant). Lab-frame SC Hamiltonians carry a large Josephson-energy
    /// constant that would otherwise dominate the global phase rotation and
    /// force needlessly small integrator steps.
    pub fn shift_energy(&mut self, e_ref: f64) {
        if e_ref == 0.0 {
            return;
        }
        match self.parts.iter_mut().find(|p| p.label == "static") {
            Some(part) => part.matrix.add_scalar(C64::new(-e_ref, 0.0)),
            None => {
                let id = OperatorMatrix::identity(&self.space).scaled_re(-e_ref);
                self.push_static("static", id);
            }
        }
        self.energy_offset += e_ref;
    }
}

/// One flux-modulation tone: amplitude * envelope(t) * cos(omega t + phase).
#[derive(Debug, Clone, Copy)]
pub struct FluxTone {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub envelope: ToneEnvelope,
}

#[derive(Debug, Clone, Copy)]
pub enum ToneEnvelope {
    Constant,
    /// t / t_ramp, clamped to [0, 1].
    LinearRamp { t_ramp: f64 },
    /// tanh(beta t/T_g) tanh(beta (1 - t/T_g)) / tanh²(beta/2); zero outside
    /// [0, T_g]; peak exactly 1 at T_g/2.
    GatePulse { t_g: f64, beta: f64 },
}

impl FluxTone {
    pub fn constant(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: 0.0,
            envelope: ToneEnvelope::Constant,
        }
    }

    pub fn ramped(amplitude: f64, omega: f64, t_ramp: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: 0.0,
            envelope: ToneEnvelope::LinearRamp { t_ramp },
        }
    }

    pub fn gate_pulse(amplitude: f64, omega: f64, t_g: f64, beta: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: 0.0,
            envelope: ToneEnvelope::GatePulse { t_g, beta },
        }
    }

    fn envelope_value(&self, t: f64) -> f64 {
        match self.envelope {
            ToneEnvelope::Constant => 1.0,
            ToneEnvelope::LinearRamp { t_ramp } => (t / t_ramp).clamp(0.0, 1.0),
            ToneEnvelope::GatePulse { t_g, beta } => {
                if !(0.0..=t_g).contains(&t) {
                    return 0.0;
                }
                let x = t / t_g;
                let norm = (beta / 2.0).tanh();
                (beta * x).tanh() * (beta * (1.0 - x)).tanh() / (norm * norm)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.envelope_value(t) * (self.omega * t + self.phase).cos()
    }
}

fn flux_modulation(tones: &[FluxTone]) -> impl Fn(f64) -> f64 + Send + Sync {
    let tones = tones.to_vec();
    move |t| tones.iter().map(|tone| tone.value(t)).sum()
}

fn max_tone_carrier(tones: &[FluxTone]) -> f64 {
    tones.iter().fold(0.0, |m, tone| m.max(tone.omega.abs()))
}

/// Kerr + pump terms of one KPO in the simple model, on `mode` of `space`:
/// detuning a†a - (K/2) a†²a² + (P/2)(a†² + a²).
fn simple_kpo_term(
    space: &HilbertSpace,
    mode: usize,
    detuning: f64,
    kerr: f64,
    pump: f64,
) -> Result<OperatorMatrix> {
    let a = annihilation(space, mode)?;
    let ad = a.dagger();
    let n = number(space, mode)?;
    let a2 = a.matmul(&a)?;
    let ad2 = ad.matmul(&ad)?;
    let kerr_term = ad2.matmul(&a2)?.scaled_re(-kerr / 2.0);
    let pump_term = ad2.add(&a2)?.scaled_re(pump / 2.0);
    n.scaled_re(detuning).add(&kerr_term)?.add(&pump_term)
}

/// Single-KPO simple model, Eq.-(4) form. Time-independent.
pub fn build_simple_single(
    space: &HilbertSpace,
    sp: &SimpleModelParams,
) -> Result<TimeDependentHamiltonian> {
    if space.n_modes() != 1 {
        return Err(Error::InvalidParameter(
            "simple single-KPO model needs a one-mode space".into(),
        ));
    }
    sp.validate()?;
    let mut h = TimeDependentHamiltonian::new(space.clone());
    h.push_static(
        "static",
        simple_kpo_term(space, 0, sp.detuning, sp.kerr, sp.pump)?,
    );
    Ok(h)
}

/// Single-KPO simple model with the pump amplitude ramped as
/// P(t) = p_max * clamp(t/t_ramp, 0, 1); used for the photon-ramp experiment.
pub fn build_simple_single_ramped(
    space: &HilbertSpace,
    sp: &SimpleModelParams,
    t_ramp: f64,
) -> Result<TimeDependentHamiltonian> {
    if space.n_modes() != 1 {
        return Err(Error::InvalidParameter(
            "simple single-KPO model needs a one-mode space".into(),
        ));
    }
    sp.validate()?;
    if t_ramp <= 0.0 {
        return Err(Error::InvalidParameter(format!("t_ramp = {t_ramp} <= 0")));
    }
    let mut h = TimeDependentHamiltonian::new(space.clone());
    h.push_static(
        "static",
        simple_kpo_term(space, 0, sp.detuning, sp.kerr, 0.0)?,
    );
    let a = annihilation(space, 0)?;
    let pump_op = a.dagger().matmul(&a.dagger())?.add(&a.matmul(&a)?)?;
    let p_max = sp.pump;
    h.push(
        "pump-ramp",
        pump_op.scaled_re(0.5),
        Arc::new(move |t| C64::new(p_max * (t / t_ramp).clamp(0.0, 1.0), 0.0)),
    );
    Ok(h)
}

fn check_two_modes(space: &HilbertSpace) -> Result<()> {
    if space.n_modes() != 2 {
        return Err(Error::InvalidParameter(format!(
            "two-KPO model needs a two-mode space, got {} modes",
            space.n_modes()
        )));
    }
    Ok(())
}

fn push_coupling_parts(
    h: &mut TimeDependentHamiltonian,
    space: &HilbertSpace,
    sp: &SimpleModelParams,
) -> Result<()> {
    let a1 = annihilation(space, 0)?;
    let a2 = annihilation(space, 1)?;
    let delta12 = sp.delta12;
    // g (a1 a2† e^{-i Δ12 t} + a1† a2 e^{+i Δ12 t})
    let hop = a1.matmul(&a2.dagger())?.scaled_re(sp.g);
    let hop_dag = hop.dagger();
    h.push(
        "coupling",
        hop,
        Arc::new(move |t| C64::from_polar(1.0, -delta12 * t)),
    );
    h.push(
        "coupling-adj",
        hop_dag,
        Arc::new(move |t| C64::from_polar(1.0, delta12 * t)),
    );
    Ok(())
}

/// Two-KPO simple model with the sum-frequency gate drive, Eq.-(8) form.
pub fn build_simple_two(
    space: &HilbertSpace,
    sp: &SimpleModelParams,
    gp: &GatePulseParams,
) -> Result<TimeDependentHamiltonian> {
    check_two_modes(space)?;
    sp.validate()?;
    if gp.kind != DriveKind::Sum {
        return Err(Error::InvalidParameter(
            "build_simple_two needs a sum-frequency gate pulse".into(),
        ));
    }
    let mut h = TimeDependentHamiltonian::new(space.clone());
    let static_term = simple_kpo_term(space, 0, sp.detuning, sp.kerr, sp.pump)?
        .add(&simple_kpo_term(space, 1, sp.detuning, sp.kerr, sp.pump)?)?;
    h.push_static("static", static_term);
    push_coupling_parts(&mut h, space, sp)?;

    // (p_g(t)/2)(a1² e^{-i Δ12 t} + a1†² e^{+i Δ12 t})
    let a1 = annihilation(space, 0)?;
    let a1sq = a1.matmul(&a1)?.scaled_re(0.5);
    let a1sq_dag = a1sq.dagger();
    let delta12 = sp.delta12;
    let gp_down = *gp;
    let gp_up = *gp;
    h.push(
        "gate",
        a1sq,
        Arc::new(move |t| C64::from_polar(pulse_envelope(t, &gp_down), -delta12 * t)),
    );
    h.push(
        "gate-adj",
        a1sq_dag,
        Arc::new(move |t| C64::from_polar(pulse_envelope(t, &gp_up), delta12 * t)),
    );
    h.max_carrier = sp.delta12.abs();
    Ok(h)
}

/// Two-KPO simple model with the difference-frequency gate drive: the gate
/// term is (p_g(t)/2) cos(Δ12 t) a1†a1, diagonal in the Fock basis of KPO1
/// and carrying both e^{+i Δ12 t} and e^{-i Δ12 t} processes.
pub fn build_simple_two_diff(
    space: &HilbertSpace,
    sp: &SimpleModelParams,
    gp: &GatePulseParams,
) -> Result<TimeDependentHamiltonian> {
    check_two_modes(space)?;
    sp.validate()?;
    if gp.kind != DriveKind::Difference {
        return Err(Error::InvalidParameter(
            "build_simple_two_diff needs a difference-frequency gate pulse".into(),
        ));
    }
    let mut h = TimeDependentHamiltonian::new(space.clone());
    let static_term = simple_kpo_term(space, 0, sp.detuning, sp.kerr, sp.pump)?
        .add(&simple_kpo_term(space, 1, sp.detuning, sp.kerr, sp.pump)?)?;
    h.push_static("static", static_term);
    push_coupling_parts(&mut h, space, sp)?;

    let n1 = number(space, 0)?;
    let delta12 = sp.delta12;
    let gp = *gp;
    h.push(
        "gate",
        n1,
        Arc::new(move |t| C64::new(0.5 * pulse_envelope(t, &gp) * (delta12 * t).cos(), 0.0)),
    );
    h.max_carrier = sp.delta12.abs();
    Ok(h)
}

/// The three pieces of one SC-model KPO on `mode`:
/// static part omega a†a - (E~_J/2N) φ̂² - N E~_J cos(φ̂/N), the cos(φ̂/N)
/// matrix for the drive part, and the charge operator n̂ (for the coupling).
fn sc_kpo_operators(
    space: &HilbertSpace,
    mode: usize,
    params: &KpoParams,
) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    let n = params.n_squid as f64;
    let ej_eff = params.ej_eff();
    let omega = omega_from_circuit(params);
    let (charge, phase) = charge_phase_operators(space, mode, params.e_c, ej_eff, params.n_squid)?;
    let cos_phi = operator_function(&phase.scaled_re(1.0 / n), f64::cos)?;
    let num = number(space, mode)?;
    let phase_sq = phase.matmul(&phase)?;
    let static_part = num
        .scaled_re(omega)
        .add(&phase_sq.scaled_re(-ej_eff / (2.0 * n)))?
        .add(&cos_phi.scaled_re(-n * ej_eff))?;
    Ok((static_part, cos_phi, charge))
}

/// Coefficient of the drive part of one SC KPO:
/// -N E_J [cos(θ0 - m(t)) - cos θ0], where m(t) is the flux modulation.
/// The static -N E~_J cos(φ̂/N) piece lives in the static part.
fn sc_drive_coeff(params: &KpoParams, tones: &[FluxTone]) -> CoeffFn {
    let n_ej = params.n_squid as f64 * params.e_j;
    let theta0 = params.theta0;
    let cos_theta0 = theta0.cos();
    let m = flux_modulation(tones);
    Arc::new(move |t| C64::new(-n_ej * ((theta0 - m(t)).cos() - cos_theta0), 0.0))
}

/// Single-KPO SC model in the lab frame, Eq.-(2) form.
pub fn build_sc_single(
    space: &HilbertSpace,
    params: &KpoParams,
    tones: &[FluxTone],
) -> Result<TimeDependentHamiltonian> {
    if space.n_modes() != 1 {
        return Err(Error::InvalidParameter(
            "SC single-KPO model needs a one-mode space".into(),
        ));
    }
    let (static_part, cos_phi, _) = sc_kpo_operators(space, 0, params)?;
    let mut h = TimeDependentHamiltonian::new(space.clone());
    h.push_static("static", static_part);
    if !tones.is_empty() {
        h.push("flux1", cos_phi, sc_drive_coeff(params, tones));
        h.max_carrier = max_tone_carrier(tones);
    }
    Ok(h)
}

/// The static (all drives off) single-KPO SC Hamiltonian, used to calibrate
/// single-photon resonances.
pub fn sc_static_hamiltonian(space: &HilbertSpace, params: &KpoParams) -> Result<OperatorMatrix> {
    if space.n_modes() != 1 {
        return Err(Error::InvalidParameter(
            "static SC Hamiltonian needs a one-mode space".into(),
        ));
    }
    let (static_part, _, _) = sc_kpo_operators(space, 0, params)?;
    Ok(static_part)
}

/// Two-KPO SC model in the lab frame, Eq.-(6) form.
///
/// The per-mode charging energies (and with them the mode frequencies and
/// the n̂/φ̂ prefactors) are renormalized by the coupling capacitor; the
/// charge-charge coupling is (16 E_C1 E_C2 / ΣE_C) n̂₁n̂₂ with the bare
/// charging energies in the coefficient.
pub fn build_sc_two(
    space: &HilbertSpace,
    p1: &KpoParams,
    p2: &KpoParams,
    tones1: &[FluxTone],
    tones2: &[FluxTone],
    coupling: &CouplingParams,
) -> Result<TimeDependentHamiltonian> {
    check_two_modes(space)?;
    let (p1_eff, p2_eff) = sc_two_effective_params(p1, p2, coupling)?;

    let (static1, cos_phi1, charge1) = sc_kpo_operators(space, 0, &p1_eff)?;
    let (static2, cos_phi2, charge2) = sc_kpo_operators(space, 1, &p2_eff)?;
    let v = charge1
        .matmul(&charge2)?
        .scaled_re(coupling.charge_coupling(p1, p2));

    let mut h = TimeDependentHamiltonian::new(space.clone());
    h.push_static("static", static1.add(&static2)?.add(&v)?);
    if !tones1.is_empty() {
        h.push("flux1", cos_phi1, sc_drive_coeff(&p1_eff, tones1));
    }
    if !tones2.is_empty() {
        h.push("flux2", cos_phi2, sc_drive_coeff(&p2_eff, tones2));
    }
    h.max_carrier = max_tone_carrier(tones1).max(max_tone_carrier(tones2));
    Ok(h)
}

/// Effective per-KPO parameters inside the coupled circuit (renormalized
/// charging energies), needed to map pump amplitudes to flux amplitudes
/// consistently with [`build_sc_two`].
pub fn sc_two_effective_params(
    p1: &KpoParams,
    p2: &KpoParams,
    coupling: &CouplingParams,
) -> Result<(KpoParams, KpoParams)> {
    let (e_c1_eff, e_c2_eff) = coupling.renormalized_charging(p1, p2);
    Ok((p1.with_e_c(e_c1_eff)?, p2.with_e_c(e_c2_eff)?))
}

/// Single-photon resonance of a static (time-independent) single-mode
/// Hamiltonian: diagonalize, take the eigenstate with the largest vacuum
/// overlap as the idle state, and return E_k - E_idle for the eigenstate k
/// maximizing the single-photon matrix element |<k|a†|idle>|.
///
/// Errors if no state is connected by a single-photon matrix element or if
/// the choice is ambiguous (competing matrix elements within a factor two).
pub fn calibrate_resonance(h_static: &OperatorMatrix) -> Result<f64> {
    let space = h_static.space().clone();
    if space.n_modes() != 1 {
        return Err(Error::InvalidParameter(
            "resonance calibration needs a one-mode space".into(),
        ));
    }
    h_static.check_hermitian()?;
    let (vals, vecs) = crate::linalg::eigh(h_static.entries())?;
    let dim = vals.len();

    // Idle state: eigenstate with the largest |<vac|psi>|.
    let mut idle = 0;
    let mut best_overlap = 0.0;
    for k in 0..dim {
        let overlap = vecs[(0, k)].norm_sqr();
        if overlap > best_overlap {
            best_overlap = overlap;
            idle = k;
        }
    }

    // a† |idle>
    let mut raised = vec![C64::new(0.0, 0.0); dim];
    for n in 0..dim - 1 {
        raised[n + 1] = C64::new(((n + 1) as f64).sqrt(), 0.0) * vecs[(n, idle)];
    }

    let mut best = (0usize, 0.0f64);
    let mut second = 0.0f64;
    for k in 0..dim {
        if k == idle {
            continue;
        }
        let elem: C64 = (0..dim).map(|i| vecs[(i, k)].conj() * raised[i]).sum();
        let mag = elem.norm();
        if mag > best.1 {
            second = best.1;
            best = (k, mag);
        } else if mag > second {
            second = mag;
        }
    }

    if best.1 < 1e-6 {
        return Err(Error::NoTransition {
            matrix_element: best.1,
        });
    }
    if second > 0.5 * best.1 {
        return Err(Error::DegenerateTransition {
            first: best.1,
            second,
        });
    }
    Ok(vals[best.0] - vals[idle])
}

/// Integrator step cap for lab-frame models: one twentieth of the fastest
/// carrier period, or None for models without drive carriers.
pub fn carrier_step_cap(h: &TimeDependentHamiltonian) -> Option<f64> {
    if h.max_carrier() > 0.0 {
        Some(TAU / h.max_carrier() / 20.0)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, tensor};
    use crate::linalg;
    use crate::params::{delta_for_pump, kerr_coefficient};
    use crate::units::{ghz, to_ghz};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn paper_simple() -> SimpleModelParams {
        let kerr = ghz(0.012);
        SimpleModelParams {
            detuning: 0.0,
            kerr,
            pump: 4.0 * kerr,
            g: ghz(0.010),
            delta12: -ghz(1.0),
        }
    }

    fn paper_pulse(p_g0: f64, kind: DriveKind) -> GatePulseParams {
        GatePulseParams::new(p_g0, 40.0, 3.0, ghz(21.0), kind).unwrap()
    }

    fn hermiticity_on_grid(h: &TimeDependentHamiltonian, t_max: f64, points: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..points {
            let t = t_max * k as f64 / (points - 1) as f64;
            let m = h.assemble(t);
            let scale = linalg::max_abs(m.entries()).max(1.0);
            worst = worst.max(m.hermiticity_deviation() / scale);
        }
        worst
    }

    #[test]
    fn simple_single_kerr_eigenstate() {
        // With Delta = 0 and P = K alpha², H|alpha> = (P²/2K)|alpha>.
        let space = HilbertSpace::single(30).unwrap();
        let kerr = ghz(0.012);
        let sp = SimpleModelParams {
            detuning: 0.0,
            kerr,
            pump: 4.0 * kerr,
            g: 0.0,
            delta12: 0.0,
        };
        let h = build_simple_single(&space, &sp).unwrap();
        let alpha = coherent_state(&space, &[c(2.0, 0.0)]).unwrap();
        let h_alpha = h.assemble(0.0).apply(&alpha).unwrap();
        let eig = sp.pump * sp.pump / (2.0 * sp.kerr);
        let residual = h_alpha.sub(&alpha.scaled(c(eig, 0.0))).unwrap().norm();
        assert!(residual < 1e-6, "residual {residual}");
    }

    #[test]
    fn simple_single_no_pump_is_diagonal_kerr() {
        let space = HilbertSpace::single(8).unwrap();
        let kerr = ghz(0.012);
        let sp = SimpleModelParams {
            detuning: 0.0,
            kerr,
            pump: 0.0,
            g: 0.0,
            delta12: 0.0,
        };
        let h = build_simple_single(&space, &sp).unwrap().assemble(0.0);
        for n in 0i64..8 {
            let expected = -kerr / 2.0 * (n * (n - 1)) as f64;
            assert_abs_diff_eq!(
                h.entries()[(n as usize, n as usize)].re,
                expected,
                epsilon = 1e-12
            );
        }
        let off: f64 = h
            .entries()
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, z)| z.norm())
            .sum();
        assert_eq!(off, 0.0);
        assert_eq!(h.hermiticity_deviation(), 0.0);
    }

    #[test]
    fn simple_two_at_t0_has_plain_coupling() {
        // Envelope vanishes at t = 0, so H(0) = sum H_j + g(a1 a2† + a1† a2).
        let space = HilbertSpace::two(10, 10).unwrap();
        let sp = paper_simple();
        let gp = paper_pulse(5.0 * sp.kerr, DriveKind::Sum);
        let h = build_simple_two(&space, &sp, &gp).unwrap();
        assert_abs_diff_eq!(
            h.coefficient("gate", 0.0).unwrap().norm(),
            0.0,
            epsilon = 1e-15
        );

        let a1 = annihilation(&space, 0).unwrap();
        let a2 = annihilation(&space, 1).unwrap();
        let hop = a1.matmul(&a2.dagger()).unwrap();
        let expected = simple_kpo_term(&space, 0, 0.0, sp.kerr, sp.pump)
            .unwrap()
            .add(&simple_kpo_term(&space, 1, 0.0, sp.kerr, sp.pump).unwrap())
            .unwrap()
            .add(&hop.add(&hop.dagger()).unwrap().scaled_re(sp.g))
            .unwrap();
        let diff = linalg::max_abs(h.assemble(0.0).sub(&expected).unwrap().entries());
        assert!(diff < 1e-12, "difference {diff}");
    }

    #[test]
    fn simple_two_decoupled_is_tensor_sum() {
        let space = HilbertSpace::two(8, 8).unwrap();
        let mut sp = paper_simple();
        sp.g = 0.0;
        let gp = paper_pulse(0.0, DriveKind::Sum);
        let h2 = build_simple_two(&space, &sp, &gp).unwrap().assemble(17.3);

        let s1 = HilbertSpace::single(8).unwrap();
        let single = build_simple_single(
            &s1,
            &SimpleModelParams {
                detuning: 0.0,
                kerr: sp.kerr,
                pump: sp.pump,
                g: 0.0,
                delta12: 0.0,
            },
        )
        .unwrap()
        .assemble(0.0);
        let id = OperatorMatrix::identity(&s1);
        let expected = tensor(&single, &id).add(&tensor(&id, &single)).unwrap();
        let diff = linalg::max_abs(h2.sub(&expected).unwrap().entries());
        assert!(diff < 1e-12);
    }

    #[test]
    fn simple_two_expectation_vs_coherent_moments() {
        // <H(t)> on |alpha, alpha> from analytic coherent-state moments:
        // <a²> = alpha², <a†²a²> = alpha⁴, <a1 a2†> = alpha².
        let space = HilbertSpace::two(30, 30).unwrap();
        let sp = paper_simple();
        let p_g0 = 5.0 * sp.kerr;
        let gp = paper_pulse(p_g0, DriveKind::Sum);
        let h = build_simple_two(&space, &sp, &gp).unwrap();

        let alpha = 2.0;
        let psi = coherent_state(&space, &[c(alpha, 0.0), c(alpha, 0.0)]).unwrap();
        let t = 0.3;
        let got = h.expectation(t, &psi).unwrap();

        let a2 = alpha * alpha;
        let a4 = a2 * a2;
        // Independent envelope evaluation.
        let x = t / gp.t_g;
        let env = p_g0 * (gp.beta * x).tanh() * (gp.beta * (1.0 - x)).tanh()
            / (gp.beta / 2.0).tanh().powi(2);
        let expected = 2.0 * (-sp.kerr / 2.0 * a4 + sp.pump * a2)
            + 2.0 * sp.g * a2 * (sp.delta12 * t).cos()
            + env * a2 * (sp.delta12 * t).cos();
        assert_abs_diff_eq!(got.re / expected, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn simple_two_kind_mismatch_rejected() {
        let space = HilbertSpace::two(6, 6).unwrap();
        let sp = paper_simple();
        assert!(build_simple_two(&space, &sp, &paper_pulse(0.0, DriveKind::Difference)).is_err());
        assert!(build_simple_two_diff(&space, &sp, &paper_pulse(0.0, DriveKind::Sum)).is_err());
    }

    #[test]
    fn simple_two_diff_gate_term() {
        let space = HilbertSpace::two(8, 8).unwrap();
        let sp = paper_simple();
        let gp = paper_pulse(3.0 * sp.kerr, DriveKind::Difference);
        let h = build_simple_two_diff(&space, &sp, &gp).unwrap();

        // Gate term vanishes where cos(Δ12 t) = 0.
        let t_zero = PI / (2.0 * sp.delta12.abs());
        assert_abs_diff_eq!(
            h.coefficient("gate", t_zero).unwrap().norm(),
            0.0,
            epsilon = 1e-12
        );

        // The gate part is diagonal in the Fock basis of mode 1.
        let part = h.parts().iter().find(|p| p.label == "gate").unwrap();
        let n1 = number(&space, 0).unwrap();
        let diff = linalg::max_abs(part.matrix.sub(&n1).unwrap().entries());
        assert_eq!(diff, 0.0);

        // p_g0 = 0 reduces to the sum-drive build with p_g0 = 0.
        let h0 = build_simple_two_diff(&space, &sp, &gp.with_peak(0.0)).unwrap();
        let href = build_simple_two(
            &space,
            &sp,
            &GatePulseParams::new(0.0, gp.t_g, gp.beta, ghz(21.0), DriveKind::Sum).unwrap(),
        )
        .unwrap();
        for &t in &[0.0, 7.7, 23.1] {
            let d = linalg::max_abs(h0.assemble(t).sub(&href.assemble(t)).unwrap().entries());
            assert!(d < 1e-12);
        }
    }

    fn paper_kpo1() -> KpoParams {
        KpoParams::from_omega(ghz(0.3), ghz(10.0), 5, FRAC_PI_4).unwrap()
    }

    fn paper_kpo2() -> KpoParams {
        KpoParams::from_omega(ghz(0.3), ghz(11.0), 5, FRAC_PI_4).unwrap()
    }

    #[test]
    fn sc_single_static_gap_near_omega() {
        // Numerical diagonalization oracle: the first gap of the static SC
        // Hamiltonian is omega_1 minus an anharmonic shift of order K.
        let space = HilbertSpace::single(30).unwrap();
        let params = paper_kpo1();
        let h = sc_static_hamiltonian(&space, &params).unwrap();
        let gap = calibrate_resonance(&h).unwrap();
        let omega = omega_from_circuit(&params);
        let kerr = kerr_coefficient(&params);
        let shift = omega - gap;
        assert!(
            shift > 0.2 * kerr && shift < 3.0 * kerr,
            "anharmonic shift {shift} rad/ns vs K = {kerr}"
        );
        // <0|H|0> to <1|H|1> gap is similarly within a few K of omega_1.
        let h00 = h.entries()[(0, 0)].re;
        let h11 = h.entries()[(1, 1)].re;
        assert!((h11 - h00 - omega).abs() < 3.0 * kerr);
    }

    #[test]
    fn sc_single_cosine_factor_at_zero_crossing() {
        // At cos(omega_p t) = 0 the full cosine factor equals cos(theta0),
        // so the drive coefficient (which subtracts the static part) is 0.
        let params = paper_kpo1();
        let omega_p = 2.0 * ghz(10.0);
        let tone = FluxTone::constant(0.05, omega_p);
        let space = HilbertSpace::single(10).unwrap();
        let h = build_sc_single(&space, &params, &[tone]).unwrap();
        let t_cross = PI / (2.0 * omega_p);
        assert_abs_diff_eq!(
            h.coefficient("flux1", t_cross).unwrap().re,
            0.0,
            epsilon = 1e-9
        );
        // And the coefficient at t = 0 equals -N E_J [cos(θ0 - δ) - cos θ0].
        let expected = -5.0 * params.e_j * ((FRAC_PI_4 - 0.05).cos() - FRAC_PI_4.cos());
        assert_abs_diff_eq!(
            h.coefficient("flux1", 0.0).unwrap().re / expected,
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sc_transmon_expansion_recovers_harmonic_ladder() {
        // Kinetic + cosine + quadratic counterterm, with the Josephson
        // constant and the quartic term removed, matches omega(a†a + 1/2)
        // ... note the static form already absorbs omega(a†a + 1/2) up to
        // the constant, so compare diagonal gaps on low Fock states.
        let space = HilbertSpace::single(30).unwrap();
        let params = paper_kpo1();
        let n = params.n_squid as f64;
        let ej_eff = params.ej_eff();
        let omega = omega_from_circuit(&params);

        let h_static = sc_static_hamiltonian(&space, &params).unwrap();
        let (_, phase) =
            charge_phase_operators(&space, 0, params.e_c, ej_eff, params.n_squid).unwrap();
        let phase2 = phase.matmul(&phase).unwrap();
        let phase4 = phase2.matmul(&phase2).unwrap();
        // Remove the Josephson constant -N E~_J and add back the quartic
        // remainder +E~_J φ̂⁴/(24 N³); what is left should be the harmonic
        // ladder omega a†a.
        let quartic = phase4.scaled_re(ej_eff / (24.0 * n * n * n));
        let mut cleaned = h_static.add(&quartic).unwrap();
        cleaned.add_scalar(c(n * ej_eff, 0.0));

        for fock in 0..3 {
            let basis = StateVector::basis(&space, &[fock]).unwrap();
            let got = cleaned.expectation_real(&basis).unwrap();
            let expected = omega * fock as f64;
            let denom = omega;
            assert!(
                (got - expected).abs() / denom < 1e-3,
                "n = {fock}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn sc_two_paper_coupling_values() {
        let p1 = paper_kpo1();
        let p2 = paper_kpo2();
        let coupling = CouplingParams::from_g(ghz(0.010), &p1, &p2).unwrap();
        assert_abs_diff_eq!(to_ghz(coupling.e_c0), 314.0, epsilon = 0.5);
        assert_abs_diff_eq!(
            to_ghz(coupling.charge_coupling(&p1, &p2)) * 1e3,
            4.58,
            epsilon = 0.02
        );
        assert_abs_diff_eq!(to_ghz(coupling.g(&p1, &p2)) * 1e3, 10.0, epsilon = 1e-6);
    }

    #[test]
    fn sc_two_static_when_all_drives_off() {
        let space = HilbertSpace::two(8, 8).unwrap();
        let p1 = paper_kpo1();
        let p2 = paper_kpo2();
        let coupling = CouplingParams::from_g(ghz(0.010), &p1, &p2).unwrap();
        let h = build_sc_two(&space, &p1, &p2, &[], &[], &coupling).unwrap();
        assert_eq!(h.parts().len(), 1);
        let d = linalg::max_abs(h.assemble(0.0).sub(&h.assemble(13.7)).unwrap().entries());
        assert_eq!(d, 0.0);
    }

    #[test]
    fn sc_builders_hermitian_on_grid() {
        let p1 = paper_kpo1();
        let p2 = paper_kpo2();
        let coupling = CouplingParams::from_g(ghz(0.010), &p1, &p2).unwrap();
        let (p1e, p2e) = sc_two_effective_params(&p1, &p2, &coupling).unwrap();
        let kerr = kerr_coefficient(&p1);
        let delta1 = delta_for_pump(4.0 * kerr, &p1e).unwrap();
        let delta2 = delta_for_pump(4.0 * kerr, &p2e).unwrap();
        let space = HilbertSpace::two(8, 8).unwrap();
        let tones1 = [
            FluxTone::constant(delta1, 2.0 * ghz(10.0)),
            FluxTone::gate_pulse(0.02, ghz(21.0), 40.0, 3.0),
        ];
        let tones2 = [FluxTone::constant(delta2, 2.0 * ghz(11.0))];
        let h = build_sc_two(&space, &p1, &p2, &tones1, &tones2, &coupling).unwrap();
        let worst = hermiticity_on_grid(&h, 40.0, 1001);
        assert!(worst < 1e-10, "relative Hermiticity deviation {worst}");
    }

    #[test]
    fn simple_builders_hermitian_on_grid() {
        let space = HilbertSpace::two(8, 8).unwrap();
        let sp = paper_simple();
        let h_sum =
            build_simple_two(&space, &sp, &paper_pulse(5.0 * sp.kerr, DriveKind::Sum)).unwrap();
        assert!(hermiticity_on_grid(&h_sum, 40.0, 1001) < 1e-10);
        let h_diff = build_simple_two_diff(
            &space,
            &sp,
            &paper_pulse(20.0 * sp.kerr, DriveKind::Difference),
        )
        .unwrap();
        assert!(hermiticity_on_grid(&h_diff, 40.0, 1001) < 1e-10);
    }

    #[test]
    fn calibrate_harmonic_and_kerr() {
        let space = HilbertSpace::single(12).unwrap();
        let omega = ghz(10.0);
        let n = number(&space, 0).unwrap();
        let harmonic = n.scaled_re(omega);
        assert_abs_diff_eq!(
            calibrate_resonance(&harmonic).unwrap() / omega,
            1.0,
            epsilon = 1e-12
        );

        // Pure Kerr: the single-photon partner of the idle (vacuum) state is
        // |1>, degenerate with it, so the resonance is zero.
        let kerr = ghz(0.012);
        let a = annihilation(&space, 0).unwrap();
        let ad2a2 = a
            .dagger()
            .matmul(&a.dagger())
            .unwrap()
            .matmul(&a.matmul(&a).unwrap())
            .unwrap();
        let pure_kerr = ad2a2.scaled_re(-kerr / 2.0);
        let res = calibrate_resonance(&pure_kerr).unwrap();
        assert_abs_diff_eq!(res / kerr, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn calibrate_paper_sc_value_frozen() {
        // Dense-eigensolver oracle, frozen: for the paper single-KPO circuit
        // the resonance sits about one Kerr coefficient below omega_1.
        let space = HilbertSpace::single(40).unwrap();
        let params = paper_kpo1();
        let h = sc_static_hamiltonian(&space, &params).unwrap();
        let res = calibrate_resonance(&h).unwrap();
        let shift_over_k = (omega_from_circuit(&params) - res) / kerr_coefficient(&params);
        assert_abs_diff_eq!(shift_over_k, 1.0, epsilon = 0.15);
    }

    #[test]
    fn energy_shift_bookkeeping() {
        let space = HilbertSpace::single(6).unwrap();
        let sp = SimpleModelParams {
            detuning: 0.0,
            kerr: ghz(0.012),
            pump: ghz(0.048),
            g: 0.0,
            delta12: 0.0,
        };
        let mut h = build_simple_single(&space, &sp).unwrap();
        let before = h.assemble(0.0);
        h.shift_energy(ghz(1.0));
        assert_abs_diff_eq!(h.energy_offset(), ghz(1.0), epsilon = 0.0);
        let after = h.assemble(0.0);
        let mut diff = before.sub(&after).unwrap();
        diff.add_scalar(c(-ghz(1.0), 0.0));
        assert!(linalg::max_abs(diff.entries()) < 1e-12);
    }

    #[test]
    fn carrier_step_cap_follows_fastest_tone() {
        let space = HilbertSpace::single(8).unwrap();
        let params = paper_kpo1();
        let tone = FluxTone::constant(0.05, 2.0 * ghz(10.0));
        let h = build_sc_single(&space, &params, &[tone]).unwrap();
        let cap = carrier_step_cap(&h).unwrap();
        assert_abs_diff_eq!(cap, TAU / (2.0 * ghz(10.0)) / 20.0, epsilon = 1e-15);
        let h_static = build_sc_single(&space, &params, &[]).unwrap();
        assert!(carrier_step_cap(&h_static).is_none());
    }
}
