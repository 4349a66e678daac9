//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hilbert space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid mode index {mode} for a {n_modes}-mode space")]
    InvalidMode { mode: usize, n_modes: usize },

    #[error("operator is not Hermitian: max |M - M^dag| = {deviation:.3e} exceeds {bound:.3e}")]
    NonHermitian { deviation: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("no single-photon transition from the ground state (largest |<k|a^dag|0>| = {matrix_element:.3e})")]
    NoTransition { matrix_element: f64 },

    #[error("ambiguous single-photon transition: competing matrix elements {first:.6e} and {second:.6e}")]
    DegenerateTransition { first: f64, second: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite amplitudes encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("rotation angle undefined: |alpha_1| = {magnitude:.3e} below 1e-6")]
    PhaseUndefined { magnitude: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with a description of the failing stage.
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
