//! Link-level simulator for beamformed over-the-air carrier frequency
//! synchronization between distributed multi-antenna panels.
//!
//! One panel is the primary (frequency reference); every secondary panel
//! runs a two-stage exchange with it:
//!
//! 1. the secondary sends an orthonormal pilot block from all of its
//!    antennas, and the primary picks a transmit beam from what it receives;
//! 2. the primary beamforms a real sinusoid burst back, and the secondary
//!    jointly estimates its carrier offset and the effective channel by
//!    maximum likelihood.
//!
//! The crate is split along that flow: [`signal`] builds the deterministic
//! waveforms, [`channel`] draws the inter-panel channel, [`protocol`] runs the
//! two stages and the beam selection rules, [`estimator`] does the offset
//! search, [`crb`] provides the Cramér–Rao benchmark and [`montecarlo`] drives
//! trials, SNR sweeps and the multi-panel / drift schedules. The experiment
//! description and its text format live in [`config`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod crb;
mod error;
pub mod estimator;
mod linalg;
pub mod montecarlo;
pub mod protocol;
pub mod signal;

pub use error::{Error, Result};

/// Complex sample type used throughout the simulator.
pub type C64 = num_complex::Complex<f64>;
