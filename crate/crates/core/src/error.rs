use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeAboveCap { degree: usize, cap: usize },

    #[error("condition A4 violated at map {map}: {message}")]
    UniformRatio { map: usize, message: String },

    #[error("index {index} out of range 1..={max} at level {level}")]
    IndexOutOfRange {
        level: usize,
        index: usize,
        max: usize,
    },

    #[error("level {requested} exceeds the partition depth cap {cap}")]
    LevelCap { requested: usize, cap: usize },

    #[error("contraction factor {beta} is not below 1")]
    NotContractive { beta: f64 },

    #[error("fixed-point iteration did not converge after {iterations} sweeps (last change {last_change:e})")]
    FixedPointDiverged { iterations: usize, last_change: f64 },

    #[error(
        "power iteration did not converge after {iterations} iterations; last bracket [{lo}, {hi}]"
    )]
    PowerIteration { iterations: usize, lo: f64, hi: f64 },

    #[error("insufficient sample resolution: {0}")]
    Resolution(String),

    #[error("invalid spectral-radius bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("{0}")]
    Regression(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of an iterative numerical method.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::FixedPointDiverged { .. } | Error::PowerIteration { .. }
        )
    }
}
