//! Simulation of the conditional-driving R_zz gate for Kerr-nonlinear
//! parametric oscillators (KPOs).
//!
//! Two KPOs, each a transmon with a dc-SQUID array, are coupled by a fixed
//! capacitance and detuned by ~1 GHz so the coupling is effectively off during
//! idle time. A flux-modulation gate pulse on KPO1 at the sum (or difference)
//! of the two KPO frequencies turns on a conditional drive of KPO2 via
//! three-wave mixing, producing a ZZ rotation of the cat-state qubits.
//!
//! The crate provides:
//!
//! - [`fock`] — truncated-Fock-space linear algebra: ladder operators,
//!   operator functions via Hermitian eigendecomposition, coherent and cat
//!   states, tensor products.
//! - [`params`] — device/drive parameter containers and the closed-form
//!   conversions between circuit energies (E_C, E_J), mode frequencies, Kerr
//!   coefficient K, pump amplitude P and coupling constant g.
//! - [`hamiltonian`] — builders for the rotating-frame "simple" model and the
//!   lab-frame superconducting-circuit ("SC") model, one and two KPOs, with
//!   sum- or difference-frequency gate drives.
//! - [`dynamics`] — adaptive Dormand–Prince (and fixed-step RK4) propagation
//!   of the Schrödinger and Lindblad equations.
//! - [`gate`] — the R_zz experiment: cat-state preparation, gate-free
//!   reference propagation, rotation-angle extraction and gate fidelity.
//!
//! Internal units: angular frequency in rad/ns (ħ = 1), time in ns. Energies
//! are stored as their angular-frequency equivalents E/ħ. Conversions from
//! ordinary frequencies in GHz are provided in [`units`].

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod gate;
pub mod hamiltonian;
pub mod linalg;
pub mod params;
pub mod units;

pub use error::{Error, Result};
