//! Unit conversions.
//!
//! Internally everything is angular frequency in rad/ns with ħ = 1; time is
//! in ns. The paper quotes ordinary frequencies f = ω/2π in GHz/MHz and
//! energies as E/h in the same units, so the conversion is a factor of 2π
//! either way (1 GHz of E/h is 2π rad/ns of E/ħ).

use std::f64::consts::TAU;

/// Ordinary frequency in GHz (or energy as E/h in GHz) to rad/ns.
pub fn ghz(f: f64) -> f64 {
    TAU * f
}

/// rad/ns back to ordinary frequency in GHz.
pub fn to_ghz(omega: f64) -> f64 {
    omega / TAU
}

/// Ordinary frequency in MHz to rad/ns.
pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e-3
}

/// rad/ns to MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU * 1e3
}

/// Microseconds to ns.
pub fn us(t: f64) -> f64 {
    t * 1e3
}
