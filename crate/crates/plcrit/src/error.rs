//! Error types shared across the crate.

use thiserror::Error;

/// Convergence class of a radial power integral, decided analytically
/// from the exponents (never from quadrature behaviour).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Convergent,
    LogDivergent,
    Divergent,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integral diverges (s={s}, q={q}, m={m}): q*m < s")]
    DivergentIntegral { s: f64, q: f64, m: f64 },

    #[error("integral is log-divergent (s={s}, q={q}, m={m}): q*m = s")]
    LogDivergent { s: f64, q: f64, m: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("quadrature tolerance not reached: value={value}, error estimate={error}")]
    ToleranceNotReached { value: f64, error: f64 },

    #[error("degenerate fit: {0}")]
    FitDegenerate(String),

    #[error("parameters outside every expansion regime: n={n}, p={p}")]
    OutOfRegimeRange { n: usize, p: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("configuration not coercive: estimated constant {0}")]
    NonCoercive(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
