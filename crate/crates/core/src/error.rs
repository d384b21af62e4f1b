use thiserror::Error;

/// Errors produced by the simulator and its verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeskinError {
    /// The curve is too close to self-intersection for the boundary integral.
    #[error("geometry error: chord-arc ratio {ratio:.3e} below {threshold} (outer s = {s:.6}, inner r = {r:.6})")]
    Geometry {
        ratio: f64,
        threshold: f64,
        s: f64,
        r: f64,
    },

    /// A stretch left the validity interval of the tension law, or the law
    /// violates positivity of the tension or its derivative.
    #[error("tension domain error: {0}")]
    TensionDomain(String),

    /// The blow-up guard fired.
    #[error("step rejected at t = {time:.6}: mode {mode} grew by factor {growth:.3e} in one step")]
    StepRejected { time: f64, mode: i64, growth: f64 },

    #[error("insufficient decay: norm ratio {ratio:.3e} below required {required:.3e}")]
    InsufficientDecay { ratio: f64, required: f64 },

    #[error("ill-conditioned eigenvector matrix (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, PeskinError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(PeskinError::InvalidInput(msg.into()))
}
