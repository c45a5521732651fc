//! Signal estimates on the evaluation grid.

use serde::{Deserialize, Serialize};

use crate::signal_model::Waveform;
use crate::sinc::{sinc_sum_direct, SincSum};
use crate::sod::NonuniformSamples;
use crate::wsk::{dequantize, filtered_samples, SymbolStream};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Source {
    Ebc,
    Wsk,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Ebc => "EBC",
            Source::Wsk => "WSK",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub grid_rate: f64,
    pub values: Vec<f64>,
    pub source: Source,
}

fn grid_len(grid_rate: f64, duration: f64) -> usize {
    (grid_rate * duration).round() as usize
}

/// Piecewise-linear interpolation through the event samples, holding the
/// first and last value outside their span. No samples gives zeros.
pub fn reconstruct_ebc(samples: &NonuniformSamples, grid_rate: f64, duration: f64) -> Reconstruction {
    let n = grid_len(grid_rate, duration);
    let pts = &samples.points;
    let values = match pts.len() {
        0 => vec![0.0; n],
        _ => {
            let mut seg = 0;
            (0..n)
                .map(|j| {
                    let t = j as f64 / grid_rate;
                    while seg + 1 < pts.len() && pts[seg + 1].0 <= t {
                        seg += 1;
                    }
                    let (t0, v0) = pts[seg];
                    if t <= t0 || seg + 1 == pts.len() {
                        return v0;
                    }
                    let (t1, v1) = pts[seg + 1];
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                })
                .collect()
        }
    };
    Reconstruction { grid_rate, values, source: Source::Ebc }
}

/// Exact sinc interpolation `sum_k v_k sinc(f_s t - k)` of uniform samples
/// onto the grid `j / grid_rate`, summing over every sample.
pub fn sinc_interpolate(samples: &[f64], f_s: f64, grid_rate: f64, duration: f64) -> Vec<f64> {
    let n_out = grid_len(grid_rate, duration);
    if samples.is_empty() {
        return vec![0.0; n_out];
    }
    match SincInterpolator::new(f_s, grid_rate, samples.len(), n_out) {
        Some(plan) => plan.apply(samples),
        None => direct_interpolate(samples, f_s, grid_rate, n_out),
    }
}

fn direct_interpolate(samples: &[f64], f_s: f64, grid_rate: f64, n_out: usize) -> Vec<f64> {
    (0..n_out)
        .map(|j| {
            let u = f_s * j as f64 / grid_rate;
            samples.iter().enumerate().map(|(k, v)| v * crate::sinc::sinc(u - k as f64)).sum()
        })
        .collect()
}

/// Reusable sinc-interpolation plan for whole-hertz rates.
#[derive(Debug, Clone)]
pub struct SincInterpolator {
    plan: std::sync::Arc<SincSum>,
}

impl SincInterpolator {
    /// `None` unless both rates are whole numbers of hertz.
    pub fn new(f_s: f64, grid_rate: f64, n_in: usize, n_out: usize) -> Option<Self> {
        let whole = |r: f64| r > 0.0 && r.fract() == 0.0 && r < 1e9;
        if !whole(f_s) || !whole(grid_rate) || n_in == 0 || n_out == 0 {
            return None;
        }
        let (fs, gr) = (f_s as usize, grid_rate as usize);
        let g = gcd(fs, gr);
        Some(Self { plan: SincSum::cached(gr / g, fs / g, 0, n_in, n_out) })
    }

    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        self.plan.apply(samples)
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Dequantizes and sinc-interpolates a symbol stream.
pub fn reconstruct_wsk(stream: &SymbolStream, grid_rate: f64, duration: f64) -> Reconstruction {
    let cfg = &stream.config;
    let values: Vec<f64> =
        stream.indices.iter().map(|&i| dequantize(i, cfg.n_bits, cfg.s_max)).collect();
    Reconstruction {
        grid_rate,
        values: sinc_interpolate(&values, cfg.f_s, grid_rate, duration),
        source: Source::Wsk,
    }
}

/// The uniform-sampling path without quantization: anti-alias, sample,
/// sinc-interpolate.
pub fn nyquist_reconstruct_reference<W: Waveform + ?Sized>(
    signal: &W,
    f_s: f64,
    grid_rate: f64,
) -> Result<Reconstruction> {
    let samples = filtered_samples(signal, f_s)?;
    Ok(Reconstruction {
        grid_rate,
        values: sinc_interpolate(&samples, f_s, grid_rate, signal.duration()),
        source: Source::Wsk,
    })
}

/// Plain-summation reference for tests of the fast path.
pub fn sinc_interpolate_direct(samples: &[f64], f_s: f64, grid_rate: f64, duration: f64) -> Vec<f64> {
    let n_out = grid_len(grid_rate, duration);
    if f_s.fract() == 0.0 && grid_rate.fract() == 0.0 {
        let g = gcd(f_s as usize, grid_rate as usize);
        return sinc_sum_direct(samples, grid_rate as usize / g, f_s as usize / g, 0, n_out);
    }
    direct_interpolate(samples, f_s, grid_rate, n_out)
}
