//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode index must be at least 1")]
    ZeroModeIndex,

    #[error("evaluation point {0} lies outside [0, 1]")]
    PointOutsideDomain(f64),

    #[error("non-finite field value at node index {index}")]
    NonFiniteField { index: usize },

    #[error("sqrt(lambda) * t = {0} exceeds the double-precision exp range")]
    ExpRangeExceeded(f64),

    #[error("contraction depth search exceeded {cap} without finding a contractive power")]
    ContractionDepthExceeded { cap: u64 },

    #[error(
        "fixed-point iteration did not reach tol {tol:e} within {max_iter} iterations \
         (last increment {last:e})"
    )]
    FixedPointDiverged {
        tol: f64,
        max_iter: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("coefficient blow-up while marching at mode p = {mode}, time step i = {step}")]
    CoefficientBlowUp { mode: usize, step: usize },

    #[error("no terminal-time root in (0, T) for epsilon = {epsilon}")]
    NoTerminalRoot { epsilon: f64 },

    #[error("rate fit needs at least {needed} points below the saturation floor, found {found}")]
    RateUnfittable { needed: usize, found: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
