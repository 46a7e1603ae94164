//! Simulation and analysis toolkit for system-bath spin models executed on
//! noisy gate-based quantum computers.
//!
//! The crate builds Trotter circuits for spin models with auxiliary-spin
//! baths, runs them under a calibrated per-gate noise model as exact
//! density-matrix evolution, extracts the effective Lindbladian the noisy
//! circuit simulates, and cross-checks the results against reference
//! Lindblad / Pauli-master-equation dynamics and the bath spectral-function
//! picture.

pub mod circuit;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod lindblad_map;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod operators;

pub use error::{Error, Result};
