//! Expressive note synthesis on a harmonic-plus-noise engine.
//!
//! The crate is organised in the order data flows through it:
//!
//! * [`score`] holds notes, the six per-note expression controls and their
//!   normalization to `[0, 1]`.
//! * [`performance`] turns notes plus expression controls into frame-wise
//!   synthesis parameters with a deterministic, invertible model.
//! * [`synth`] renders synthesis parameters to audio (oscillator bank,
//!   filtered noise, convolution reverb).
//! * [`features`] measures the expression controls back from synthesis
//!   parameters, plus A-weighted loudness of audio.
//! * [`metrics`] provides the multi-scale spectral loss, expression RMSE,
//!   Pearson correlation and the control sweep harness.
//! * [`io`] covers the score/params/WAV file formats, render requests, the
//!   HTTP service and the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod features;
pub mod io;
pub mod metrics;
pub mod performance;
pub mod score;
pub mod synth;

mod dsp;

pub use error::{Error, Result};

/// Audio sample rate in Hz.
pub const SAMPLE_RATE: u32 = 16_000;
/// Samples per control frame.
pub const FRAME_SIZE: usize = 64;
/// Control frames per second.
pub const FRAME_RATE: u32 = SAMPLE_RATE / FRAME_SIZE as u32;
/// Harmonics in the oscillator bank.
pub const N_HARMONICS: usize = 60;
/// Linearly spaced noise filter bands.
pub const N_NOISE_BANDS: usize = 65;
