use thiserror::Error;

/// Errors raised by the library.
///
/// Scalar payloads are carried as `f64` so the type stays independent of the
/// scalar the computation ran in.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid physical model: {0}")]
    InvalidModel(String),

    #[error("invalid orbital elements: {0}")]
    InvalidElements(String),

    #[error("state invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radial distance {r:e} below singularity floor {floor:e}")]
    Singularity { r: f64, floor: f64 },

    #[error("unbound orbit (energy {energy:e}, eccentricity {eccentricity:e})")]
    UnboundOrbit { energy: f64, eccentricity: f64 },

    #[error("Kepler equation did not converge (M = {mean_anomaly}, e = {eccentricity}, residual {residual:e})")]
    KeplerNonConvergence {
        mean_anomaly: f64,
        eccentricity: f64,
        residual: f64,
    },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({steps}) reached at t = {t}")]
    TooManySteps { t: f64, steps: usize },

    #[error("non-finite value in integration at t = {t}")]
    NonFinite { t: f64 },

    #[error("parallax inversion failed: {0}")]
    InversionFailed(String),

    #[error("no real inclination: cos^2 i = {cos2i} outside [0, 1]")]
    NoRealInclination { cos2i: f64 },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
