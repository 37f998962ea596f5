use std::path::PathBuf;

use thiserror::Error;

use crate::magnetics::Frame;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid inertia tensor: {0}")]
    InvalidInertia(String),

    #[error("invalid orbit elements: {0}")]
    InvalidOrbit(String),

    #[error("Kepler iteration did not converge (M = {mean_anomaly}, e = {eccentricity})")]
    KeplerNonConvergence { mean_anomaly: f64, eccentricity: f64 },

    #[error("state became non-finite at t = {t} s")]
    NonFiniteState { t: f64 },

    #[error("frame mismatch: expected {expected:?}, got {found:?}")]
    FrameMismatch { expected: Frame, found: Frame },

    #[error("date {date} outside coefficient validity window [{start}, {end}]")]
    DateOutOfRange { date: f64, start: f64, end: f64 },

    #[error("requested degree {requested} exceeds coefficient file maximum {available}")]
    DegreeOutOfRange { requested: usize, available: usize },

    #[error("IGRF coefficient parse error at line {line}: {msg}")]
    CoefficientParse { line: usize, msg: String },

    #[error(
        "IGRF coefficient file not found at {path}: expected the standard whitespace-delimited \
         'g/h n m <epochs...> SV' text format"
    )]
    MissingCoefficients { path: PathBuf },

    #[error("Newton iteration failed to converge after {iterations} iterations (|F| = {residual:e})")]
    NewtonNonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate magnetic field (|B| = 0) at t = {t} s")]
    DegenerateField { t: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no run configurations supplied")]
    EmptySuite,

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
