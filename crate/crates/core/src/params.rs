//! Device and drive parameters, and the closed-form conversions between them.
//!
//! A KPO here is a transmon with an array of N dc SQUIDs, charging energy E_C
//! and per-SQUID Josephson energy E_J, flux-biased at angle theta0 so the
//! effective Josephson energy is E~_J = E_J cos(theta0). All energies are
//! stored as angular frequencies (rad/ns, ħ = 1).
//!
//! Conversions implemented:
//!
//! - mode frequency      omega = sqrt(8 E_C E~_J / N)
//! - Kerr coefficient    K = E_C / N^2
//! - pump amplitude      P = delta_p sqrt(E_C E~_J / 2N) tan(theta0)
//! - coupling constant   g = (4 E_C1 E_C2 / (E_C0+E_C1+E_C2))
//!                           * (E~_J1 E~_J2 / (4 N^2 E_C1 E_C2))^{1/4}
//!
//! and their closed-form inverses.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Above this E_C/E~_J ratio the transmon approximation becomes questionable.
pub const TRANSMON_RATIO_WARN: f64 = 0.05;

/// Above this flux-modulation amplitude the small-pump reduction to the
/// simple model becomes questionable.
pub const PUMP_AMPLITUDE_WARN: f64 = 0.1;

/// Circuit parameters of one KPO.
#[derive(Debug, Clone, Copy)]
pub struct KpoParams {
    /// Charging energy of the shunt capacitance (rad/ns).
    pub e_c: f64,
    /// Josephson energy per SQUID (rad/ns).
    pub e_j: f64,
    /// Number of dc SQUIDs in the array.
    pub n_squid: u32,
    /// dc flux bias in radians, 0 <= theta0 < pi/2.
    pub theta0: f64,
}

impl KpoParams {
    pub fn new(e_c: f64, e_j: f64, n_squid: u32, theta0: f64) -> Result<Self> {
        let p = Self {
            e_c,
            e_j,
            n_squid,
            theta0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Construct from a target mode frequency instead of E_J.
    pub fn from_omega(e_c: f64, omega: f64, n_squid: u32, theta0: f64) -> Result<Self> {
        let e_j = ej_from_omega(omega, e_c, n_squid, theta0)?;
        Self::new(e_c, e_j, n_squid, theta0)
    }

    fn validate(&self) -> Result<()> {
        if self.e_c <= 0.0 {
            return Err(Error::InvalidParameter(format!("E_C = {} <= 0", self.e_c)));
        }
        if self.n_squid < 1 {
            return Err(Error::InvalidParameter("SQUID count must be >= 1".into()));
        }
        if !(0.0..FRAC_PI_2).contains(&self.theta0) {
            return Err(Error::InvalidParameter(format!(
                "theta0 = {} outside [0, pi/2)",
                self.theta0
            )));
        }
        if self.ej_eff() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "effective Josephson energy E_J cos(theta0) = {} <= 0",
                self.ej_eff()
            )));
        }
        Ok(())
    }

    /// Effective Josephson energy E~_J = E_J cos(theta0).
    pub fn ej_eff(&self) -> f64 {
        self.e_j * self.theta0.cos()
    }

    /// E_C / E~_J; the transmon regime needs this << 1.
    pub fn transmon_ratio(&self) -> f64 {
        self.e_c / self.ej_eff()
    }

    /// Copy with the charging energy replaced (used for the kinetic
    /// renormalization by a coupling capacitor).
    pub fn with_e_c(&self, e_c: f64) -> Result<Self> {
        Self::new(e_c, self.e_j, self.n_squid, self.theta0)
    }
}

/// Mode frequency omega = sqrt(8 E_C E~_J / N).
pub fn omega_from_circuit(params: &KpoParams) -> f64 {
    (8.0 * params.e_c * params.ej_eff() / params.n_squid as f64).sqrt()
}

/// Invert the frequency relation: E_J = N omega^2 / (8 E_C cos theta0).
pub fn ej_from_omega(omega: f64, e_c: f64, n_squid: u32, theta0: f64) -> Result<f64> {
    if omega <= 0.0 || e_c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ej_from_omega needs positive omega and E_C (omega = {omega}, E_C = {e_c})"
        )));
    }
    if n_squid < 1 {
        return Err(Error::InvalidParameter("SQUID count must be >= 1".into()));
    }
    if !(0.0..FRAC_PI_2).contains(&theta0) {
        return Err(Error::InvalidParameter(format!(
            "theta0 = {theta0} outside [0, pi/2)"
        )));
    }
    Ok(n_squid as f64 * omega * omega / (8.0 * e_c * theta0.cos()))
}

/// One flux-modulation tone applied to a SQUID array.
#[derive(Debug, Clone, Copy)]
pub struct PumpTone {
    /// Dimensionless flux-modulation amplitude delta.
    pub delta: f64,
    /// Angular pump frequency (rad/ns).
    pub omega_p: f64,
    /// Phase at t = 0 (radians).
    pub phase: f64,
}

impl PumpTone {
    pub fn new(delta: f64, omega_p: f64) -> Result<Self> {
        if delta < 0.0 {
            return Err(Error::InvalidParameter(format!("delta = {delta} < 0")));
        }
        Ok(Self {
            delta,
            omega_p,
            phase: 0.0,
        })
    }

    /// True when the amplitude is beyond the small-pump regime.
    pub fn beyond_small_pump(&self) -> bool {
        self.delta > PUMP_AMPLITUDE_WARN
    }
}

/// Kerr coefficient and parametric pump amplitude:
/// K = E_C / N^2, P = delta sqrt(E_C E~_J / 2N) tan(theta0).
pub fn kerr_and_pump(params: &KpoParams, tone: &PumpTone) -> (f64, f64) {
    let n = params.n_squid as f64;
    let kerr = params.e_c / (n * n);
    let pump = tone.delta * (params.e_c * params.ej_eff() / (2.0 * n)).sqrt() * params.theta0.tan();
    (kerr, pump)
}

/// Kerr coefficient alone, K = E_C / N^2.
pub fn kerr_coefficient(params: &KpoParams) -> f64 {
    let n = params.n_squid as f64;
    params.e_c / (n * n)
}

/// Flux amplitude delta realizing a target pump amplitude P.
pub fn delta_for_pump(p_target: f64, params: &KpoParams) -> Result<f64> {
    if p_target < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pump amplitude P = {p_target} < 0"
        )));
    }
    let n = params.n_squid as f64;
    let tan = params.theta0.tan();
    if tan <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "theta0 = {} gives no parametric pumping (tan theta0 = 0)",
            params.theta0
        )));
    }
    Ok(p_target / ((params.e_c * params.ej_eff() / (2.0 * n)).sqrt() * tan))
}

/// Capacitive coupling between the two KPOs: the charging energy of the
/// coupling capacitor, from which the simple-model coupling constant g
/// follows in the transmon approximation.
#[derive(Debug, Clone, Copy)]
pub struct CouplingParams {
    /// Charging energy of the coupling capacitor (rad/ns).
    pub e_c0: f64,
}

impl CouplingParams {
    pub fn from_e_c0(e_c0: f64) -> Result<Self> {
        if e_c0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("E_C0 = {e_c0} <= 0")));
        }
        Ok(Self { e_c0 })
    }

    /// Solve for E_C0 from a target coupling constant.
    pub fn from_g(g_target: f64, p1: &KpoParams, p2: &KpoParams) -> Result<Self> {
        let e_c0 = ec0_from_g(g_target, p1, p2)?;
        Ok(Self { e_c0 })
    }

    /// The coupling constant implied by this E_C0.
    pub fn g(&self, p1: &KpoParams, p2: &KpoParams) -> f64 {
        coupling_g(self.e_c0, p1, p2)
    }

    /// Coefficient of the charge-charge coupling 16 E_C1 E_C2 / sum(E_C).
    pub fn charge_coupling(&self, p1: &KpoParams, p2: &KpoParams) -> f64 {
        16.0 * p1.e_c * p2.e_c / (self.e_c0 + p1.e_c + p2.e_c)
    }

    /// Per-mode charging energies renormalized by the coupling capacitor:
    /// E_Cj (E_C0 + E_Ck) / (E_C0 + E_C1 + E_C2).
    pub fn renormalized_charging(&self, p1: &KpoParams, p2: &KpoParams) -> (f64, f64) {
        let total = self.e_c0 + p1.e_c + p2.e_c;
        (
            p1.e_c * (self.e_c0 + p2.e_c) / total,
            p2.e_c * (self.e_c0 + p1.e_c) / total,
        )
    }
}

fn coupling_quartic_root(p1: &KpoParams, p2: &KpoParams) -> f64 {
    debug_assert_eq!(p1.n_squid, p2.n_squid);
    let n = p1.n_squid as f64;
    (p1.ej_eff() * p2.ej_eff() / (4.0 * n * n * p1.e_c * p2.e_c)).powf(0.25)
}

/// Coupling constant in the transmon approximation:
/// g = (4 E_C1 E_C2 / (E_C0 + E_C1 + E_C2)) (E~_J1 E~_J2 / (4 N^2 E_C1 E_C2))^{1/4}.
pub fn coupling_g(e_c0: f64, p1: &KpoParams, p2: &KpoParams) -> f64 {
    4.0 * p1.e_c * p2.e_c / (e_c0 + p1.e_c + p2.e_c) * coupling_quartic_root(p1, p2)
}

/// Closed-form inverse of the coupling constant:
/// E_C0 = 4 E_C1 E_C2 (…)^{1/4} / g - E_C1 - E_C2.
pub fn ec0_from_g(g_target: f64, p1: &KpoParams, p2: &KpoParams) -> Result<f64> {
    if g_target <= 0.0 {
        return Err(Error::InvalidParameter(format!("g = {g_target} <= 0")));
    }
    let e_c0 = 4.0 * p1.e_c * p2.e_c * coupling_quartic_root(p1, p2) / g_target - p1.e_c - p2.e_c;
    if e_c0 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target g = {g_target} is infeasible (requires E_C0 = {e_c0} <= 0)"
        )));
    }
    Ok(e_c0)
}

/// Sum- vs difference-frequency gate drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    /// Gate pulse at omega_1 + omega_2.
    Sum,
    /// Gate pulse at |omega_1 - omega_2|.
    Difference,
}

/// Gate-pulse parameters.
#[derive(Debug, Clone, Copy)]
pub struct GatePulseParams {
    /// Peak value of the simple-model gate amplitude p_g (rad/ns).
    pub p_g0: f64,
    /// Gate duration (ns).
    pub t_g: f64,
    /// Rise-shape parameter of the tanh envelope.
    pub beta: f64,
    /// Gate-drive carrier frequency (rad/ns); omega_1 + omega_2 for the sum
    /// drive, |omega_1 - omega_2| for the difference drive.
    pub omega_d: f64,
    pub kind: DriveKind,
}

impl GatePulseParams {
    pub fn new(p_g0: f64, t_g: f64, beta: f64, omega_d: f64, kind: DriveKind) -> Result<Self> {
        if p_g0 < 0.0 {
            return Err(Error::InvalidParameter(format!("p_g0 = {p_g0} < 0")));
        }
        if t_g <= 0.0 {
            return Err(Error::InvalidParameter(format!("T_g = {t_g} <= 0")));
        }
        if beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("beta = {beta} <= 0")));
        }
        Ok(Self {
            p_g0,
            t_g,
            beta,
            omega_d,
            kind,
        })
    }

    pub fn with_peak(&self, p_g0: f64) -> Self {
        Self { p_g0, ..*self }
    }
}

/// Gate-pulse envelope
/// p_g(t) = p_g0 tanh(beta t/T_g) tanh(beta (1 - t/T_g)) / tanh^2(beta/2),
/// zero outside [0, T_g] (integrators may overshoot the ends slightly).
pub fn pulse_envelope(t: f64, gp: &GatePulseParams) -> f64 {
    if !(0.0..=gp.t_g).contains(&t) {
        return 0.0;
    }
    let x = t / gp.t_g;
    let norm = (gp.beta / 2.0).tanh();
    gp.p_g0 * (gp.beta * x).tanh() * (gp.beta * (1.0 - x)).tanh() / (norm * norm)
}

/// Flux-modulation amplitude of the gate drive,
/// delta_g(t) = p_g(t) sqrt(2N / (E_C1 E~_J1)) / tan(theta0),
/// the inverse of the pump-amplitude map applied to the pulse envelope.
pub fn delta_g_envelope(t: f64, gp: &GatePulseParams, params1: &KpoParams) -> f64 {
    let n = params1.n_squid as f64;
    pulse_envelope(t, gp) * (2.0 * n / (params1.e_c * params1.ej_eff())).sqrt()
        / params1.theta0.tan()
}

/// Peak flux amplitude of the gate drive.
pub fn delta_g_peak(gp: &GatePulseParams, params1: &KpoParams) -> f64 {
    delta_g_envelope(gp.t_g / 2.0, gp, params1)
}

/// Parameters of the rotating-frame simple model (per KPO, both identical in
/// this work): detuning Delta, Kerr K, pump P, coupling g and the detuning
/// Delta_12 = omega_1 - omega_2 between the KPOs.
#[derive(Debug, Clone, Copy)]
pub struct SimpleModelParams {
    /// Detuning Delta (rad/ns); the paper sets 0.
    pub detuning: f64,
    /// Kerr coefficient K (rad/ns).
    pub kerr: f64,
    /// Pump amplitude P (rad/ns).
    pub pump: f64,
    /// Coupling constant g (rad/ns).
    pub g: f64,
    /// omega_1 - omega_2 (rad/ns).
    pub delta12: f64,
}

impl SimpleModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.kerr <= 0.0 {
            return Err(Error::InvalidParameter(format!("K = {} <= 0", self.kerr)));
        }
        if self.pump < 0.0 {
            return Err(Error::InvalidParameter(format!("P = {} < 0", self.pump)));
        }
        Ok(())
    }

    /// Stabilized coherent amplitude alpha = sqrt(P/K).
    pub fn alpha(&self) -> f64 {
        (self.pump / self.kerr).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, to_ghz};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn paper_kpo1() -> KpoParams {
        KpoParams::from_omega(ghz(0.3), ghz(10.0), 5, FRAC_PI_4).unwrap()
    }

    fn paper_kpo2() -> KpoParams {
        KpoParams::from_omega(ghz(0.3), ghz(11.0), 5, FRAC_PI_4).unwrap()
    }

    #[test]
    fn omega_paper_value() {
        // E_C/h = 300 MHz, E~_J/h = 208.333 GHz, N = 5 -> omega/2pi = 10 GHz.
        let p = paper_kpo1();
        assert_abs_diff_eq!(to_ghz(p.ej_eff()), 208.3333333, epsilon = 1e-5);
        assert_abs_diff_eq!(to_ghz(omega_from_circuit(&p)), 10.0, epsilon = 1e-10);
    }

    #[test]
    fn omega_scalings() {
        let p = paper_kpo1();
        // Quadrupling E_C doubles omega.
        let quad_ec = KpoParams::new(4.0 * p.e_c, p.e_j, p.n_squid, p.theta0).unwrap();
        assert_abs_diff_eq!(
            omega_from_circuit(&quad_ec) / omega_from_circuit(&p),
            2.0,
            epsilon = 1e-12
        );
        // N -> 4N with fixed E~_J (fixed per-SQUID E_J) halves omega.
        let quad_n = KpoParams::new(p.e_c, p.e_j, 4 * p.n_squid, p.theta0).unwrap();
        assert_abs_diff_eq!(
            omega_from_circuit(&quad_n) / omega_from_circuit(&p),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ej_from_omega_paper_values() {
        // omega/2pi = 10 GHz, E_C/h = 300 MHz, N = 5, theta0 = pi/4:
        // E~_J/h = 208.333 GHz, E_J/h = 294.63 GHz.
        let e_j = ej_from_omega(ghz(10.0), ghz(0.3), 5, FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(to_ghz(e_j), 294.6278, epsilon = 5e-4);
        assert_abs_diff_eq!(to_ghz(e_j) * FRAC_PI_4.cos(), 208.33333, epsilon = 1e-4);
        // KPO2 at 11 GHz: E~_J2/h = 252.083 GHz.
        let p2 = paper_kpo2();
        assert_abs_diff_eq!(to_ghz(p2.ej_eff()), 252.08333, epsilon = 1e-4);
    }

    #[test]
    fn ej_omega_round_trip() {
        let p = paper_kpo1();
        let omega = omega_from_circuit(&p);
        let e_j = ej_from_omega(omega, p.e_c, p.n_squid, p.theta0).unwrap();
        assert_abs_diff_eq!(e_j / p.e_j, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn theta0_at_pi_over_2_rejected() {
        assert!(ej_from_omega(ghz(10.0), ghz(0.3), 5, FRAC_PI_2).is_err());
    }

    #[test]
    fn kerr_and_pump_paper_values() {
        // K/h = E_C/N^2 = 12 MHz; delta_p = 0.05 -> P/h = 125 MHz, P/K ~ 10.4.
        let p = paper_kpo1();
        let tone = PumpTone::new(0.05, 2.0 * ghz(10.0)).unwrap();
        let (kerr, pump) = kerr_and_pump(&p, &tone);
        assert_abs_diff_eq!(to_ghz(kerr) * 1e3, 12.0, epsilon = 1e-9);
        assert_abs_diff_eq!(to_ghz(pump) * 1e3, 125.0, epsilon = 1e-6);
        assert_abs_diff_eq!(pump / kerr, 10.41666667, epsilon = 1e-6);
        // delta_p = 0 -> P = 0.
        let silent = PumpTone::new(0.0, 0.0).unwrap();
        assert_eq!(kerr_and_pump(&p, &silent).1, 0.0);
    }

    #[test]
    fn delta_for_pump_values() {
        let p = paper_kpo1();
        // P = 4K = 48 MHz -> delta ~ 0.0192.
        let target = 4.0 * kerr_coefficient(&p);
        let delta = delta_for_pump(target, &p).unwrap();
        assert_abs_diff_eq!(delta, 0.0192, epsilon = 1e-6);
        assert_eq!(delta_for_pump(0.0, &p).unwrap(), 0.0);
        // Linearity.
        let delta2 = delta_for_pump(2.0 * target, &p).unwrap();
        assert_abs_diff_eq!(delta2 / delta, 2.0, epsilon = 1e-12);
        // Round trip through kerr_and_pump.
        let tone = PumpTone::new(delta, 0.0).unwrap();
        let (_, pump) = kerr_and_pump(&p, &tone);
        assert_abs_diff_eq!(pump / target, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ec0_paper_value() {
        // Independent hand evaluation of the inversion:
        // quartic root = (208.3333*252.0833/(100*0.09))^{1/4} = 8.74007,
        // E_C0 = 0.36*8.74007/0.010 - 0.6 = 314.04 GHz.
        let p1 = paper_kpo1();
        let p2 = paper_kpo2();
        let g = ghz(0.010);
        let e_c0 = ec0_from_g(g, &p1, &p2).unwrap();
        assert_abs_diff_eq!(to_ghz(e_c0), 314.0, epsilon = 0.5);

        // Recompute-g round trip to 1e-9 relative.
        let g_back = coupling_g(e_c0, &p1, &p2);
        assert_abs_diff_eq!(g_back / g, 1.0, epsilon = 1e-9);

        // g doubled halves E_C0 + sum(E_C).
        let e_c0_2 = ec0_from_g(2.0 * g, &p1, &p2).unwrap();
        let total1 = e_c0 + p1.e_c + p2.e_c;
        let total2 = e_c0_2 + p1.e_c + p2.e_c;
        assert_abs_diff_eq!(total1 / total2, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_g_rejected() {
        let p1 = paper_kpo1();
        let p2 = paper_kpo2();
        assert!(ec0_from_g(ghz(100.0), &p1, &p2).is_err());
        assert!(ec0_from_g(0.0, &p1, &p2).is_err());
    }

    #[test]
    fn charge_coupling_paper_value() {
        // 16 E_C1 E_C2 / sum(E) ~ h * 4.58 MHz at E_C0/h ~ 314 GHz.
        let p1 = paper_kpo1();
        let p2 = paper_kpo2();
        let coupling = CouplingParams::from_g(ghz(0.010), &p1, &p2).unwrap();
        let v = coupling.charge_coupling(&p1, &p2);
        assert_abs_diff_eq!(to_ghz(v) * 1e3, 4.58, epsilon = 0.02);
    }

    fn test_pulse(p_g0: f64) -> GatePulseParams {
        GatePulseParams::new(p_g0, 40.0, 3.0, ghz(21.0), DriveKind::Sum).unwrap()
    }

    #[test]
    fn pulse_envelope_endpoints_and_peak() {
        let gp = test_pulse(1.0);
        assert_eq!(pulse_envelope(0.0, &gp), 0.0);
        assert_eq!(pulse_envelope(gp.t_g, &gp), 0.0);
        assert_abs_diff_eq!(pulse_envelope(gp.t_g / 2.0, &gp), 1.0, epsilon = 1e-15);
        // Outside the window the pulse is defined as zero.
        assert_eq!(pulse_envelope(-0.1, &gp), 0.0);
        assert_eq!(pulse_envelope(gp.t_g + 0.1, &gp), 0.0);
    }

    #[test]
    fn pulse_envelope_quarter_point() {
        // beta = 3, t = T_g/4: p_g0 tanh(0.75) tanh(2.25) / tanh^2(1.5).
        let gp = test_pulse(2.0);
        let expected = 2.0 * (0.75f64).tanh() * (2.25f64).tanh() / (1.5f64).tanh().powi(2);
        assert_abs_diff_eq!(pulse_envelope(10.0, &gp), expected, epsilon = 1e-14);
    }

    #[test]
    fn pulse_envelope_symmetric_with_max_at_center() {
        let gp = test_pulse(1.0);
        let mut max = 0.0f64;
        for k in 0..=400 {
            let t = gp.t_g * k as f64 / 400.0;
            let v = pulse_envelope(t, &gp);
            let mirrored = pulse_envelope(gp.t_g - t, &gp);
            assert_abs_diff_eq!(v, mirrored, epsilon = 1e-12);
            max = max.max(v);
            assert!(v <= 1.0 + 1e-12);
        }
        assert_abs_diff_eq!(max, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn delta_g_inverse_map_identity() {
        // kerr_and_pump applied to the peak delta_g returns P = p_g0.
        let p1 = paper_kpo1();
        let p_g0 = 5.0 * kerr_coefficient(&p1);
        let gp = test_pulse(p_g0);
        let peak = delta_g_peak(&gp, &p1);
        let tone = PumpTone::new(peak, 0.0).unwrap();
        let (_, pump) = kerr_and_pump(&p1, &tone);
        assert_abs_diff_eq!(pump / p_g0, 1.0, epsilon = 1e-12);
        // Paper params: p_g0 = 5K gives peak flux amplitude ~ 0.024.
        assert_abs_diff_eq!(peak, 0.024, epsilon = 1e-6);
    }

    #[test]
    fn delta_g_zero_pulse() {
        let p1 = paper_kpo1();
        let gp = test_pulse(0.0);
        for k in 0..=10 {
            assert_eq!(delta_g_envelope(gp.t_g * k as f64 / 10.0, &gp, &p1), 0.0);
        }
    }

    #[test]
    fn simple_params_alpha() {
        let sp = SimpleModelParams {
            detuning: 0.0,
            kerr: ghz(0.012),
            pump: 4.0 * ghz(0.012),
            g: ghz(0.010),
            delta12: -ghz(1.0),
        };
        sp.validate().unwrap();
        assert_abs_diff_eq!(sp.alpha(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn renormalized_charging_limits() {
        let p1 = paper_kpo1();
        let p2 = paper_kpo2();
        // E_C0 -> infinity: renormalization factors -> 1 and coupling -> 0.
        let huge = CouplingParams::from_e_c0(ghz(1e9)).unwrap();
        let (r1, r2) = huge.renormalized_charging(&p1, &p2);
        assert_abs_diff_eq!(r1 / p1.e_c, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r2 / p2.e_c, 1.0, epsilon = 1e-6);
        assert!(huge.charge_coupling(&p1, &p2) < ghz(1e-6));
    }

    #[test]
    fn transmon_ratio_diagnostic() {
        let p = paper_kpo1();
        assert!(p.transmon_ratio() < TRANSMON_RATIO_WARN);
        let bad = KpoParams::new(ghz(1.0), ghz(2.0), 1, 0.0).unwrap();
        assert!(bad.transmon_ratio() > TRANSMON_RATIO_WARN);
    }
}
