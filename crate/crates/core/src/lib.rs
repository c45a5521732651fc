//! Event-based communication (send-on-delta sampling, one bit per event)
//! against a minimal uniform-sampling and quantization link.
//!
//! The crate generates bounded varying-bandwidth test signals by time
//! warping a bandlimited sinc series, encodes them with both systems,
//! reconstructs, and reduces Monte-Carlo sweeps to relative transmit power
//! and bandwidth figures.
//!
//! Module map:
//!
//! * [`signal_model`]: bandwidth profiles, warped test signals, dense traces
//! * [`sod`]: send-on-delta encoder/decoder and the inter-event bound
//! * [`wsk`]: anti-alias filter, uniform sampling, mid-rise quantizer
//! * [`reconstruction`]: linear (events) and sinc (uniform) reconstruction
//! * [`metrics`]: NMSE and the relative power/bandwidth figures
//! * [`sweep`], [`comparison`], [`output`]: the experiment harness

pub mod comparison;
pub mod error;
pub mod metrics;
mod par;
pub mod output;
pub mod reconstruction;
pub mod signal_model;
pub mod sinc;
pub mod sod;
pub mod sweep;
pub mod wsk;

pub use error::{Error, Result};

/// Amplitude bound of every test signal.
pub const S_MAX: f64 = 4.0;
/// Peak instantaneous bandwidth in Hz, shared by all profiles.
pub const W_MAX: f64 = 1000.0;
/// Observation window in seconds.
pub const DURATION: f64 = 1.0;
/// Rate of the NMSE evaluation grid in Hz.
pub const GRID_RATE: f64 = 16_000.0;
/// The five mean instantaneous bandwidths of the standard sweep.
pub const STANDARD_W_MEANS: [f64; 5] = [325.0, 475.0, 625.0, 775.0, 925.0];
