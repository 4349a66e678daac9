//! Run manifests: everything needed to reproduce a run bit-identically.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The fully resolved configuration (after CLI overrides); feeding this
    /// manifest back through --config reproduces the same CSVs.
    pub config: ExperimentConfig,
    /// Derived parameters in presentation units (GHz, MHz, ns).
    pub resolved: serde_json::Value,
    /// CSV files written by the run.
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    /// Tolerance-halving and Fock-bump deltas, when certification ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceEvidence>,
    /// Per-command summary values (final photon numbers, fidelity minima...).
    pub summary: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceEvidence {
    /// Change of the headline result when tolerances are halved.
    pub half_tolerance_delta: f64,
    /// Change of the headline result when every Fock dimension grows by 8.
    pub fock_bump_delta: f64,
    /// Abort threshold the deltas were checked against.
    pub threshold: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: ExperimentConfig) -> Self {
        Self {
            tool: "kposim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            resolved: serde_json::Value::Null,
            outputs: Vec::new(),
            wall_time_s: 0.0,
            convergence: None,
            summary: serde_json::Value::Null,
        }
    }

    pub fn write(&self, dir: &std::path::Path) -> std::io::Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text)
    }
}
