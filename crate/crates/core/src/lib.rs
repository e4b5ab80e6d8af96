//! Transient 2-D magnetoquasistatic finite elements with an energy-based
//! vector hysteresis material kernel.
//!
//! The crate provides:
//! - the double-Langevin anhysteretic law and its lookup-table inverse,
//! - vector-play hysteresis with per-cell dissipation accounting,
//! - fixed-point B → H inversion schemes (direct, Newton, preconditioned),
//! - the thin-sheet dynamic eddy-current extension,
//! - a field-circuit-coupled implicit Euler solver on triangulated
//!   rectilinear quarter models, and
//! - loss accounting, field probes and benchmark harnesses behind a CLI.

pub mod anhysteretic;
pub mod assembly;
pub mod circuit;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod geometry;
pub mod inversion;
pub mod math;
pub mod mesh;
pub mod play;
pub mod postproc;
pub mod runbench;
pub mod sheet;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
