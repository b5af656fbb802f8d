use thiserror::Error;

/// Errors produced by the numerical routines and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("root bracketing failed for target {target}: {detail}")]
    Bracket { target: f64, detail: String },

    #[error("truncation mass deficit {deficit:.3e} exceeds bound {bound:.3e}; increase the branch truncation")]
    MassDeficit { deficit: f64, bound: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("eigengap {gap:.3e} below threshold {threshold:.3e} at z = {z}")]
    Eigengap { gap: f64, threshold: f64, z: String },

    #[error("tail sequence has {len} terms but {needed} are required")]
    TailTooShort { len: usize, needed: usize },

    #[error("mass {mass:.3e} escaped below the mesh floor {floor:.3e} (tolerance {tol:.3e})")]
    Escape { mass: f64, floor: f64, tol: f64 },

    #[error("quadrature reached error estimate {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("degree cap {cap} reached; best gap {achieved:.3e} does not meet {requested:.3e}")]
    DegreeCap { cap: usize, achieved: f64, requested: f64 },

    #[error("one-sided fit infeasible at degree {0}")]
    Infeasible(usize),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error comes from bad user input rather than a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Config(_) | Error::Domain(_))
    }
}
