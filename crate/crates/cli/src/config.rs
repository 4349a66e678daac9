//! Experiment configuration: TOML files with the parameter schema, CLI-flag
//! overrides, and re-loading from a run manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use kposim_core::dynamics::{Method, SolverSettings};
use kposim_core::gate::{CouplingSpec, ModelKind, PumpFreqMode, RzzSetup};
use kposim_core::params::{DriveKind, KpoParams};
use kposim_core::units::{ghz, mhz};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhotonRamp,
    RzzSweep,
    LossSweep,
    Calibrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Simple,
    Sc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Drive {
    Sum,
    Difference,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentBlock {
    pub kind: ExperimentKind,
    pub model: Model,
}

/// One KPO circuit: E_C, N, theta0 and either E_J or the target mode
/// frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpoBlock {
    #[serde(rename = "E_C_GHz")]
    pub e_c_ghz: f64,
    #[serde(rename = "E_J_GHz", skip_serializing_if = "Option::is_none")]
    pub e_j_ghz: Option<f64>,
    #[serde(rename = "omega_GHz", skip_serializing_if = "Option::is_none")]
    pub omega_ghz: Option<f64>,
    #[serde(rename = "N")]
    pub n: u32,
    pub theta0_rad: f64,
}

impl KpoBlock {
    pub fn to_params(&self) -> CliResult<KpoParams> {
        let e_c = ghz(self.e_c_ghz);
        match (self.e_j_ghz, self.omega_ghz) {
            (Some(e_j), None) => KpoParams::new(e_c, ghz(e_j), self.n, self.theta0_rad)
                .map_err(|e| CliError::Config(e.to_string())),
            (None, Some(omega)) => {
                KpoParams::from_omega(e_c, ghz(omega), self.n, self.theta0_rad)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
            _ => Err(CliError::Config(
                "give exactly one of E_J_GHz or omega_GHz".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpFreqModeKey {
    AutoCalibrated,
    Explicit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpBlock {
    #[serde(rename = "P_over_K", skip_serializing_if = "Option::is_none")]
    pub p_over_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_p: Option<f64>,
    pub pump_freq_mode: PumpFreqModeKey,
    #[serde(rename = "omega_p1_GHz", skip_serializing_if = "Option::is_none")]
    pub omega_p1_ghz: Option<f64>,
    #[serde(rename = "omega_p2_GHz", skip_serializing_if = "Option::is_none")]
    pub omega_p2_ghz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingBlock {
    #[serde(rename = "g_MHz", skip_serializing_if = "Option::is_none")]
    pub g_mhz: Option<f64>,
    #[serde(rename = "E_C0_GHz", skip_serializing_if = "Option::is_none")]
    pub e_c0_ghz: Option<f64>,
}

impl CouplingBlock {
    pub fn to_spec(&self) -> CliResult<CouplingSpec> {
        match (self.g_mhz, self.e_c0_ghz) {
            (Some(g), None) => Ok(CouplingSpec::TargetG(mhz(g))),
            (None, Some(e)) => Ok(CouplingSpec::ChargingEnergy(ghz(e))),
            _ => Err(CliError::Config(
                "give exactly one of g_MHz or E_C0_GHz".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateBlock {
    #[serde(rename = "p_g0_over_K")]
    pub p_g0_over_k: f64,
    #[serde(rename = "T_g_ns")]
    pub t_g_ns: f64,
    pub beta: f64,
    pub drive_kind: Drive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampBlock {
    pub delta_p_max: f64,
    #[serde(rename = "T_ns")]
    pub t_ns: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub points: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self { points: 51 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossBlock {
    #[serde(rename = "T1_us", skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<Vec<f64>>,
    #[serde(rename = "T1_us_min", skip_serializing_if = "Option::is_none")]
    pub t1_us_min: Option<f64>,
    #[serde(rename = "T1_us_max", skip_serializing_if = "Option::is_none")]
    pub t1_us_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Target rotation angle for the pre-tuning bisection; default pi/2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_target_rad: Option<f64>,
}

impl LossBlock {
    /// Explicit list or log-spaced grid over [T1_us_min, T1_us_max].
    pub fn t1_grid_us(&self) -> CliResult<Vec<f64>> {
        if let Some(values) = &self.t1_us {
            if values.is_empty() || values.iter().any(|v| *v <= 0.0) {
                return Err(CliError::Config("T1_us must be positive".into()));
            }
            return Ok(values.clone());
        }
        match (self.t1_us_min, self.t1_us_max, self.points) {
            (Some(lo), Some(hi), Some(n)) if lo > 0.0 && hi > lo && n >= 2 => Ok((0..n)
                .map(|k| {
                    let f = k as f64 / (n - 1) as f64;
                    10f64.powf(lo.log10() + f * (hi.log10() - lo.log10()))
                })
                .collect()),
            _ => Err(CliError::Config(
                "loss block needs T1_us = [...] or T1_us_min/T1_us_max/points".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKey {
    Dp54,
    Rk4,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default = "default_method")]
    pub method: MethodKey,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_dim: Option<usize>,
    /// Re-run with halved tolerances and a +8 Fock bump and record the
    /// changes in the manifest; abort (exit 3) when they are too large.
    #[serde(default)]
    pub certify: bool,
}

fn default_method() -> MethodKey {
    MethodKey::Dp54
}

fn default_samples() -> usize {
    2001
}

impl SolverBlock {
    pub fn to_settings(&self) -> CliResult<SolverSettings> {
        let settings = SolverSettings {
            method: match self.method {
                MethodKey::Dp54 => Method::Dp54,
                MethodKey::Rk4 => Method::Rk4,
            },
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step_ns,
            initial_step: None,
            renormalize: false,
            samples: self.samples,
        };
        settings
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(settings)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentBlock,
    pub kpo1: KpoBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kpo2: Option<KpoBlock>,
    pub pump: PumpBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampBlock>,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossBlock>,
    pub solver: SolverBlock,
    pub output: OutputBlock,
}

/// CLI-flag overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<Model>,
    pub drive: Option<Drive>,
    pub out: Option<String>,
    pub tol: Option<f64>,
    pub fock_dim: Option<usize>,
    pub certify: Option<bool>,
}

impl ExperimentConfig {
    /// Load from a TOML config or from the `config` field of a JSON run
    /// manifest (chosen by file extension).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: crate::manifest::RunManifest = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad manifest {}: {e}", path.display())))?;
            Ok(manifest.config)
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
        }
    }

    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(model) = ov.model {
            self.experiment.model = model;
        }
        if let Some(drive) = ov.drive {
            if let Some(gate) = &mut self.gate {
                gate.drive_kind = drive;
            }
        }
        if let Some(out) = &ov.out {
            self.output.dir = out.clone();
        }
        if let Some(tol) = ov.tol {
            self.solver.rel_tol = tol;
            self.solver.abs_tol = tol;
        }
        if let Some(dim) = ov.fock_dim {
            self.solver.fock_dim = Some(dim);
        }
        if let Some(certify) = ov.certify {
            self.solver.certify = certify;
        }
    }

    pub fn model_kind(&self) -> ModelKind {
        match self.experiment.model {
            Model::Simple => ModelKind::Simple,
            Model::Sc => ModelKind::Sc,
        }
    }

    pub fn drive_kind(&self) -> CliResult<DriveKind> {
        let gate = self
            .gate
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [gate] block".into()))?;
        Ok(match gate.drive_kind {
            Drive::Sum => DriveKind::Sum,
            Drive::Difference => DriveKind::Difference,
        })
    }

    pub fn pump_p_over_k(&self) -> CliResult<f64> {
        match (self.pump.p_over_k, self.pump.delta_p) {
            (Some(x), None) if x > 0.0 => Ok(x),
            (None, Some(_)) => Err(CliError::Config(
                "gate experiments take the pump as P_over_K; delta_p is for the photon ramp"
                    .into(),
            )),
            _ => Err(CliError::Config(
                "give exactly one of P_over_K or delta_p (positive)".into(),
            )),
        }
    }

    fn pump_freq_mode(&self) -> CliResult<PumpFreqMode> {
        match self.pump.pump_freq_mode {
            PumpFreqModeKey::AutoCalibrated => Ok(PumpFreqMode::AutoCalibrated),
            PumpFreqModeKey::Explicit => {
                let (f1, f2) = (self.pump.omega_p1_ghz, self.pump.omega_p2_ghz);
                match (f1, f2) {
                    (Some(f1), Some(f2)) => Ok(PumpFreqMode::Explicit {
                        omega_p1: ghz(f1),
                        omega_p2: ghz(f2),
                    }),
                    _ => Err(CliError::Config(
                        "explicit pump_freq_mode needs omega_p1_GHz and omega_p2_GHz".into(),
                    )),
                }
            }
        }
    }

    /// Assemble the two-KPO gate setup (rzz-sweep, loss-sweep, calibrate).
    pub fn to_rzz_setup(&self) -> CliResult<RzzSetup> {
        let kpo1 = self.kpo1.to_params()?;
        let kpo2 = self
            .kpo2
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [kpo2] block".into()))?
            .to_params()?;
        let gate = self
            .gate
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [gate] block".into()))?;
        let coupling = self
            .coupling
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [coupling] block".into()))?
            .to_spec()?;
        let mut setup = RzzSetup::new(self.model_kind(), self.drive_kind()?, kpo1, kpo2);
        setup.p_over_k = self.pump_p_over_k()?;
        setup.coupling = coupling;
        setup.t_g = gate.t_g_ns;
        setup.beta = gate.beta;
        setup.fock_dim = self.solver.fock_dim;
        setup.pump_freq_mode = self.pump_freq_mode()?;
        setup.settings = self.solver.to_settings()?;
        if gate.t_g_ns <= 0.0 || gate.beta <= 0.0 || gate.p_g0_over_k < 0.0 {
            return Err(CliError::Config("invalid [gate] parameters".into()));
        }
        Ok(setup)
    }

    /// Resolve the output directory, honoring KPOSIM_OUT_ROOT for relative
    /// paths.
    pub fn output_dir(&self) -> std::path::PathBuf {
        let dir = std::path::PathBuf::from(&self.output.dir);
        if dir.is_relative() {
            if let Ok(root) = std::env::var("KPOSIM_OUT_ROOT") {
                if !root.is_empty() {
                    return std::path::PathBuf::from(root).join(dir);
                }
            }
        }
        dir
    }
}
