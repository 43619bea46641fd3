use thiserror::Error;

/// Errors raised by configuration validation and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid physical parameter: {0}")]
    InvalidPhysics(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("noise density {n0:e} A^2/Hz is below the thermal floor {floor:e} A^2/Hz")]
    BelowThermalFloor { n0: f64, floor: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}, tolerance {tolerance:e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("probability {0:e} outside [0, 1] beyond rounding")]
    ProbabilityRange(f64),

    #[error("empty sweep grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
