//! Experiment front end for the KPO R_zz simulator: config parsing, the
//! figure-reproduction commands, CSV/manifest output and quick-look plots.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod manifest;
pub mod svg;

use std::fmt;

/// Exit codes: 0 success, 2 config error, 3 convergence failure, 4 numerical
/// failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Convergence(String),
    Numerical(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Convergence(m) => write!(f, "convergence failure: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Core errors arising after configuration was accepted are numerical;
/// invalid-parameter errors are configuration problems.
impl From<kposim_core::Error> for CliError {
    fn from(e: kposim_core::Error) -> Self {
        fn root_is_config(e: &kposim_core::Error) -> bool {
            match e {
                kposim_core::Error::InvalidParameter(_)
                | kposim_core::Error::SpaceMismatch(_)
                | kposim_core::Error::InvalidMode { .. } => true,
                kposim_core::Error::Context { source, .. } => root_is_config(source),
                _ => false,
            }
        }
        if root_is_config(&e) {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
