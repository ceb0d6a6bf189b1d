use thiserror::Error;

/// Byte-offset parse failure for source expressions.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sigma {name} = {value}: {reason}")]
    SigmaInvalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("curve {curve} is not monotone in characteristic coordinates near t = {t}")]
    NonMonotone { curve: u8, t: f64 },

    #[error("curve {curve}: {reason}")]
    InvalidCurve { curve: u8, reason: String },

    #[error("no intersection of curve {curve} with characteristic at t = {t}")]
    NoIntersection { curve: u8, t: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("source undefined at ({x}, {y}): {reason}")]
    Domain { x: f64, y: f64, reason: String },

    #[error("point ({x}, {y}) lies outside {region}")]
    OutOfRegion { x: f64, y: f64, region: &'static str },

    #[error("kernel requires y1 < y (got y = {y}, y1 = {y1})")]
    InvalidTime { y: f64, y1: f64 },

    #[error("Volterra step {step} is numerically singular (condition {cond:e})")]
    StepSingular { step: usize, cond: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value produced while {0}")]
    NonFinite(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSingular { .. }
                | Error::NonMonotone { .. }
                | Error::NoIntersection { .. }
                | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
