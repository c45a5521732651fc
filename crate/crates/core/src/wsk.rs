//! The uniform-sampling baseline: anti-alias low-pass, uniform sampling and
//! a mid-rise uniform quantizer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::signal_model::{DenseTrace, Waveform, TABLE_GUARD};
use crate::{Error, Result, DURATION, GRID_RATE, S_MAX};

pub const FILTER_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WskConfig {
    pub f_s: f64,
    pub n_bits: u32,
    pub filter_order: usize,
    pub s_max: f64,
    pub duration: f64,
}

impl WskConfig {
    pub fn new(f_s: f64, n_bits: u32) -> Self {
        Self { f_s, n_bits, filter_order: FILTER_ORDER, s_max: S_MAX, duration: DURATION }
    }

    /// `f_s = 2 W_max N_os`.
    pub fn from_oversampling(n_os: f64, n_bits: u32, w_max: f64) -> Self {
        Self::new(sampling_rate(n_os, w_max), n_bits)
    }

    /// Bits on air per second, `n_bits * f_s`.
    pub fn symbol_rate(&self) -> f64 {
        self.n_bits as f64 * self.f_s
    }

    pub fn sample_count(&self) -> usize {
        (self.f_s * self.duration + 1e-9).floor() as usize
    }
}

/// `2 w_max n_os`, snapped to whole hertz so grid ratios stay rational.
pub fn sampling_rate(n_os: f64, w_max: f64) -> f64 {
    (2.0 * w_max * n_os).round()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub config: WskConfig,
    pub indices: Vec<u32>,
    pub duration: f64,
}

impl SymbolStream {
    pub fn to_csv_line(&self) -> String {
        self.indices.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }
}

/// One biquad, `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Transposed direct form II over `x`, state primed for a constant
    /// input equal to `x[0]` so a DC segment passes without transient.
    fn run(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let mut s2 = (b2 - a2) * x0;
        let mut s1 = (b1 - a1) * x0 + s2;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + s1;
            s1 = b1 * input - a1 * y + s2;
            s2 = b2 * input - a2 * y;
            *v = y;
        }
    }

    fn response(&self, omega: f64) -> f64 {
        use rustfft::num_complex::Complex64;
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        let num = self.b[0] + self.b[1] * z1 + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z1 + self.a[1] * z2;
        (num / den).norm()
    }
}

/// Digital Butterworth low-pass as cascaded second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    pub sections: Vec<Biquad>,
}

impl Butterworth {
    /// Bilinear transform of the analog prototype, prewarped so the -3 dB
    /// point lands exactly on `cutoff`. `order` must be even.
    pub fn lowpass(order: usize, cutoff: f64, rate: f64) -> Result<Self> {
        let nyquist = rate / 2.0;
        if !(cutoff > 0.0 && cutoff < nyquist) {
            return Err(Error::CutoffAboveNyquist { cutoff, nyquist });
        }
        if order == 0 || !order.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("filter order {order} must be even")));
        }
        let k = (PI * cutoff / rate).tan();
        let k2 = k * k;
        let sections = (0..order / 2)
            .map(|i| {
                // pole pair angle from the negative real axis
                let theta = PI * (2 * i + 1) as f64 / (2 * order) as f64;
                let damp = 2.0 * theta.cos();
                let a0 = 1.0 + damp * k + k2;
                Biquad {
                    b: [k2 / a0, 2.0 * k2 / a0, k2 / a0],
                    a: [2.0 * (k2 - 1.0) / a0, (1.0 - damp * k + k2) / a0],
                }
            })
            .collect();
        Ok(Self { sections })
    }

    pub fn filter_in_place(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }

    /// Magnitude response of one pass at `freq` for sample rate `rate`.
    pub fn magnitude(&self, freq: f64, rate: f64) -> f64 {
        let omega = 2.0 * PI * freq / rate;
        self.sections.iter().map(|s| s.response(omega)).product()
    }

    /// Forward then backward pass; the phase cancels and the magnitude is
    /// squared. The ends are extended by odd reflection first.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.filter_in_place(&mut ext);
        ext.reverse();
        self.filter_in_place(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase order-8 Butterworth low-pass with cutoff `f_s / 2`.
pub fn antialias(trace: &DenseTrace, f_s: f64) -> Result<DenseTrace> {
    antialias_with_order(trace, f_s, FILTER_ORDER)
}

pub fn antialias_with_order(trace: &DenseTrace, f_s: f64, order: usize) -> Result<DenseTrace> {
    let filter = Butterworth::lowpass(order, f_s / 2.0, trace.rate)?;
    Ok(DenseTrace::new(trace.rate, trace.start, filter.filtfilt(&trace.values)))
}

/// Values at `k / f_s` for `k < floor(f_s * duration)`. Grid-aligned
/// instants are read directly; others are linearly interpolated.
pub fn uniform_sample(trace: &DenseTrace, f_s: f64, duration: f64) -> Vec<f64> {
    let count = (f_s * duration + 1e-9).floor() as usize;
    let ratio = trace.rate / f_s;
    let stride = ratio.round();
    if (ratio - stride).abs() < 1e-9 && stride >= 1.0 {
        let first = (-trace.start) as usize;
        return trace.decimate(first, stride as usize, count);
    }
    (0..count)
        .map(|k| {
            let pos = k as f64 / f_s * trace.rate - trace.start as f64;
            let i = (pos.floor() as usize).min(trace.len().saturating_sub(2));
            let frac = pos - i as f64;
            trace.values[i] * (1.0 - frac) + trace.values[i + 1] * frac
        })
        .collect()
}

/// Mid-rise quantizer index with saturation.
pub fn quantize(x: f64, n_bits: u32, s_max: f64) -> u32 {
    let levels = 1u32 << n_bits;
    let q = 2.0 * s_max / levels as f64;
    ((x + s_max) / q).floor().clamp(0.0, (levels - 1) as f64) as u32
}

pub fn dequantize(index: u32, n_bits: u32, s_max: f64) -> f64 {
    let q = 2.0 * s_max / (1u32 << n_bits) as f64;
    -s_max + (index as f64 + 0.5) * q
}

/// Quantization step `2 s_max / 2^n_bits`.
pub fn quantizer_step(n_bits: u32, s_max: f64) -> f64 {
    2.0 * s_max / (1u32 << n_bits) as f64
}

/// Anti-alias, sample, quantize. The trace must cover `[0, duration)`.
pub fn wsk_encode(trace: &DenseTrace, config: &WskConfig) -> Result<SymbolStream> {
    let filtered = antialias_with_order(trace, config.f_s, config.filter_order)?;
    let samples = uniform_sample(&filtered, config.f_s, config.duration);
    Ok(quantize_samples(&samples, config))
}

pub fn quantize_samples(samples: &[f64], config: &WskConfig) -> SymbolStream {
    SymbolStream {
        config: *config,
        indices: samples.iter().map(|&x| quantize(x, config.n_bits, config.s_max)).collect(),
        duration: config.duration,
    }
}

/// Filter grid for sampling rate `f_s`: the smallest integer multiple of
/// `f_s` not below [`GRID_RATE`], so every sampling instant is a grid
/// point.
pub fn filter_grid_rate(f_s: f64) -> f64 {
    f_s * (GRID_RATE / f_s).ceil()
}

/// Evaluates `signal` on the filter grid for `f_s`, extended by
/// [`TABLE_GUARD`] on both sides so the low-pass sees the signal's own
/// continuation instead of a truncation edge.
pub fn guarded_trace<W: Waveform + ?Sized>(signal: &W, f_s: f64) -> DenseTrace {
    let rate = filter_grid_rate(f_s);
    let guard = (TABLE_GUARD * rate).floor() as i64;
    let len = (rate * signal.duration()).round() as usize + 2 * guard as usize;
    signal.sample(rate, -guard, len)
}

/// Filtered, unquantized samples at `k / f_s` from a guarded trace.
pub fn filtered_samples<W: Waveform + ?Sized>(signal: &W, f_s: f64) -> Result<Vec<f64>> {
    let trace = guarded_trace(signal, f_s);
    let filtered = antialias(&trace, f_s)?;
    Ok(uniform_sample(&filtered, f_s, signal.duration()))
}
