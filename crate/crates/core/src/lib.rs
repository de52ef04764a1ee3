//! Simulation of ancilla-assisted ensemble measurements on dense density
//! matrices: noninvasive joint probabilities, interferometric expectation
//! values, oscillator encodings, single-scan state and process tomography,
//! and engineered decoherence under dynamical decoupling.

pub mod circuits;
pub mod error;
pub mod expectation;
pub mod noise;
pub mod noninvasive;
pub mod oscillator;
pub mod qcore;
pub mod readout;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
