//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("flux density out of range: |B| = {b} T exceeds the invertible range {max} T")]
    OutOfRange { b: f64, max: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("config schema violation at {path}: {message}")]
    ConfigSchema { path: String, message: String },

    #[error("mesh build error: {0}")]
    MeshBuild(String),

    #[error("material inversion failed at integration point {point} (triangle {triangle}): residual {residual:.3e} after {iterations} iterations")]
    InversionFailure {
        point: usize,
        triangle: usize,
        residual: f64,
        iterations: u32,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("time step rejected at t = {time} s after {halvings} dt halvings")]
    StepRejected { time: f64, halvings: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
