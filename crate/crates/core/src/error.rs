use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mean instantaneous bandwidth {0} Hz outside the open interval (250, 1000) Hz")]
    MeanBandwidthOutOfRange(f64),

    #[error("no realization within |s| <= {s_max} after {attempts} draws (W = {w_mean} Hz)")]
    RejectionBudgetExhausted { w_mean: f64, s_max: f64, attempts: u32 },

    #[error("realization {realization} at W = {w_mean} Hz failed: {source}")]
    Realization {
        w_mean: f64,
        realization: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("send-on-delta needs at least two levels, got {0}")]
    TooFewLevels(usize),

    #[error("event stream leaves the level grid at event {index} (level {level})")]
    CorruptEventStream { index: usize, level: i64 },

    #[error("cutoff {cutoff} Hz is not below the grid Nyquist frequency {nyquist} Hz")]
    CutoffAboveNyquist { cutoff: f64, nyquist: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: reference has {reference} points, estimate has {estimate}")]
    LengthMismatch { reference: usize, estimate: usize },

    #[error("reference signal has zero energy")]
    ZeroEnergyReference,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
