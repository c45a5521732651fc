//! Bounded varying-bandwidth test signals.
//!
//! A prototype `p(x) = sum_n a_n sinc(x - n)` (Nyquist samples at integer
//! `x`, i.e. bandwidth 1/2 in `x`, or 1 Hz in `tau = x / 2`) is warped by
//! `x = 2 * gamma(t)`, where `gamma` is the antiderivative of the
//! instantaneous bandwidth `W(t)`. The local sample density in `t` is then
//! `2 W(t)` and the slope obeys `|s'(t)| <= 2 pi s_max W(t)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::sinc::{lagrange6, SincSum};
use crate::{Error, Result, DURATION, S_MAX, W_MAX};

/// Extra time covered by the fast evaluation table on both sides of the
/// observation window, so filters can see the signal's true continuation.
pub const TABLE_GUARD: f64 = 0.125;

/// Prototype table nodes per unit of `x`.
const TABLE_DENSITY: usize = 64;

/// Offset-Gaussian instantaneous bandwidth
/// `W(t) = c + (W_max - c) exp(-(t - 0.5)^2 / (2 sigma^2))` with
/// `c = (4 W_mean - W_max) / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthProfile {
    w_mean: f64,
    w_max: f64,
    sigma: f64,
    center: f64,
    duration: f64,
}

impl BandwidthProfile {
    pub fn new(w_mean: f64) -> Result<Self> {
        if !(w_mean > 250.0 && w_mean < 1000.0) {
            return Err(Error::MeanBandwidthOutOfRange(w_mean));
        }
        Ok(Self { w_mean, w_max: W_MAX, sigma: 0.1, center: 0.5, duration: DURATION })
    }

    pub fn w_mean(&self) -> f64 {
        self.w_mean
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    fn floor_level(&self) -> f64 {
        (4.0 * self.w_mean - self.w_max) / 3.0
    }

    fn bump_height(&self) -> f64 {
        self.w_max - self.floor_level()
    }

    /// `W(t)` in Hz; total in `t`.
    pub fn inst_bandwidth(&self, t: f64) -> f64 {
        let z = (t - self.center) / self.sigma;
        self.floor_level() + self.bump_height() * (-0.5 * z * z).exp()
    }

    /// `gamma(t) = integral_0^t W`, closed form via `erf`. The expression is
    /// valid for any real `t`; inside the window it is the warped time.
    pub fn warp(&self, t: f64) -> f64 {
        let k = self.sigma * std::f64::consts::SQRT_2;
        let gauss = self.bump_height() * self.sigma * (PI / 2.0).sqrt();
        self.floor_level() * t
            + gauss * (libm::erf((t - self.center) / k) - libm::erf(-self.center / k))
    }

    /// Largest `|dW/dt|`, reached one sigma from the center.
    pub fn max_bandwidth_slope(&self) -> f64 {
        self.bump_height() / self.sigma * (-0.5f64).exp()
    }

    /// Number of prototype amplitudes, `round(2 gamma(duration))`.
    pub fn amplitude_count(&self) -> usize {
        (2.0 * self.warp(self.duration)).round() as usize
    }
}

/// `2 pi s_max W(t)`: the slope bound of a bounded warped signal.
pub fn derivative_bound(profile: &BandwidthProfile, t: f64, s_max: f64) -> f64 {
    2.0 * PI * s_max * profile.inst_bandwidth(t)
}

/// Uniformly sampled amplitudes; sample `i` sits at `(start + i) / rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrace {
    pub rate: f64,
    /// grid index of the first sample (0 for traces starting at t = 0)
    pub start: i64,
    pub values: Vec<f64>,
}

impl DenseTrace {
    pub fn new(rate: f64, start: i64, values: Vec<f64>) -> Self {
        Self { rate, start, values }
    }

    pub fn t0(&self) -> f64 {
        self.start as f64 / self.rate
    }

    #[inline]
    pub fn time_at(&self, i: usize) -> f64 {
        (self.start + i as i64) as f64 / self.rate
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Every `stride`-th sample starting at `first`.
    pub fn decimate(&self, first: usize, stride: usize, count: usize) -> Vec<f64> {
        self.values.iter().skip(first).step_by(stride).take(count).copied().collect()
    }
}

/// A deterministic continuous-time signal the samplers can consume.
pub trait Waveform: Sync {
    fn value_at(&self, t: f64) -> f64;

    fn duration(&self) -> f64;

    /// Upper bound on `|ds/dt|`; sizes detection grids.
    fn slope_bound(&self) -> f64;

    /// Upper bound on `|d2s/dt2|`; sizes the near-miss search around
    /// sampled extrema.
    fn curvature_bound(&self) -> f64;

    /// Samples at `(start + i) / rate` for `i < len`.
    fn sample(&self, rate: f64, start: i64, len: usize) -> DenseTrace {
        let values = (0..len).map(|i| self.value_at((start + i as i64) as f64 / rate)).collect();
        DenseTrace::new(rate, start, values)
    }
}

/// Provenance of one realization: a master seed, a substream id and the
/// index of the accepted draw within that substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSeed {
    pub master: u64,
    pub stream: u64,
    pub attempt: u32,
}

impl SignalSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream, attempt: 0 }
    }

    /// Substream for realization `m` of the profile with mean bandwidth
    /// `w_mean`. Keyed on the bandwidth value so that subsetting a sweep
    /// does not change the signals.
    pub fn for_realization(master: u64, w_mean: f64, m: usize) -> Self {
        let w_key = (w_mean * 1000.0).round() as u64;
        Self::new(master, (w_key << 32) | (m as u64 & 0xffff_ffff))
    }
}

impl From<u64> for SignalSeed {
    fn from(master: u64) -> Self {
        Self::new(master, 0)
    }
}

/// Prototype values on a fine uniform grid in `x`.
#[derive(Debug)]
struct PrototypeTable {
    /// `x` of the first node times `TABLE_DENSITY`
    first_node: i64,
    values: Vec<f64>,
}

/// A realized varying-bandwidth signal. Immutable; cheap to clone.
#[derive(Debug, Clone)]
pub struct VbwSignal {
    profile: BandwidthProfile,
    amplitudes: Arc<[f64]>,
    s_max: f64,
    seed: Option<SignalSeed>,
    table: Arc<PrototypeTable>,
}

impl VbwSignal {
    /// Builds a signal from explicit amplitudes (no bound check).
    pub fn from_amplitudes(profile: BandwidthProfile, amplitudes: Vec<f64>) -> Self {
        Self::build(profile, amplitudes.into(), None)
    }

    fn build(profile: BandwidthProfile, amplitudes: Arc<[f64]>, seed: Option<SignalSeed>) -> Self {
        let table = Arc::new(Self::build_table(&profile, &amplitudes));
        Self { profile, amplitudes, s_max: S_MAX, seed, table }
    }

    fn build_table(profile: &BandwidthProfile, amplitudes: &[f64]) -> PrototypeTable {
        let l = TABLE_DENSITY as f64;
        let x_lo = 2.0 * profile.warp(-TABLE_GUARD);
        let x_hi = 2.0 * profile.warp(profile.duration() + TABLE_GUARD);
        let first_node = (x_lo * l).floor() as i64 - 4;
        let last_node = (x_hi * l).ceil() as i64 + 4;
        let n_out = (last_node - first_node + 1) as usize;
        let values = if amplitudes.is_empty() {
            vec![0.0; n_out]
        } else {
            SincSum::cached(TABLE_DENSITY, 1, first_node, amplitudes.len(), n_out).apply(amplitudes)
        };
        PrototypeTable { first_node, values }
    }

    pub fn profile(&self) -> &BandwidthProfile {
        &self.profile
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn seed(&self) -> Option<SignalSeed> {
        self.seed
    }

    /// Prototype `sum_n a_n sinc(x - n)` by direct summation.
    pub fn prototype_exact(&self, x: f64) -> f64 {
        let s = (PI * x).sin();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, &a)| {
                let d = x - n as f64;
                if d == 0.0 {
                    a
                } else {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    a * sign * s / (PI * d)
                }
            })
            .sum()
    }

    /// `s(t)` by direct summation of the series.
    pub fn value_exact(&self, t: f64) -> f64 {
        self.prototype_exact(2.0 * self.profile.warp(t))
    }

    fn prototype_fast(&self, x: f64) -> Option<f64> {
        let u = x * TABLE_DENSITY as f64 - self.table.first_node as f64;
        let i = u.floor();
        let base = i as i64 - 2;
        if base < 0 || base as usize + 6 > self.table.values.len() {
            return None;
        }
        let w = lagrange6(u - i);
        let nodes = &self.table.values[base as usize..base as usize + 6];
        Some(w.iter().zip(nodes).map(|(w, v)| w * v).sum())
    }
}

impl Waveform for VbwSignal {
    /// Table lookup with six-point interpolation inside the guarded window
    /// (error below 1e-9), direct summation elsewhere.
    fn value_at(&self, t: f64) -> f64 {
        let x = 2.0 * self.profile.warp(t);
        self.prototype_fast(x).unwrap_or_else(|| self.prototype_exact(x))
    }

    fn duration(&self) -> f64 {
        self.profile.duration()
    }

    fn slope_bound(&self) -> f64 {
        2.0 * PI * self.s_max * self.profile.w_max()
    }

    fn curvature_bound(&self) -> f64 {
        let w = 2.0 * PI * self.profile.w_max();
        w * w * self.s_max + 2.0 * PI * self.s_max * self.profile.max_bandwidth_slope()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// redraws allowed before giving up
    pub max_draws: u32,
    /// rate of the grid on which `|s| <= s_max` is enforced
    pub check_rate: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { max_draws: 1000, check_rate: crate::sod::DEFAULT_SYNTHESIS_RATE }
    }
}

/// Draws a bounded realization with default options.
pub fn synthesize_vbw(profile: &BandwidthProfile, seed: impl Into<SignalSeed>) -> Result<VbwSignal> {
    synthesize_vbw_with(profile, seed.into(), &SynthesisOptions::default()).map(|(s, _)| s)
}

/// Draws i.i.d. standard-normal amplitudes from the seed's substream until
/// the realization stays within `s_max` on the check grid. Returns the
/// accepted signal together with its check-grid trace over the closed
/// window `[0, duration]`.
pub fn synthesize_vbw_with(
    profile: &BandwidthProfile,
    seed: SignalSeed,
    opts: &SynthesisOptions,
) -> Result<(VbwSignal, DenseTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.master);
    rng.set_stream(seed.stream);
    let n = profile.amplitude_count();
    let len = (opts.check_rate * profile.duration()).round() as usize + 1;
    for attempt in 0..opts.max_draws {
        let amplitudes: Arc<[f64]> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let signal =
            VbwSignal::build(*profile, amplitudes, Some(SignalSeed { attempt, ..seed }));
        if let Some(trace) = bounded_trace(&signal, opts.check_rate, len) {
            return Ok((signal, trace));
        }
    }
    Err(Error::RejectionBudgetExhausted {
        w_mean: profile.w_mean(),
        s_max: S_MAX,
        attempts: opts.max_draws,
    })
}

fn bounded_trace(signal: &VbwSignal, rate: f64, len: usize) -> Option<DenseTrace> {
    let mut values = Vec::with_capacity(len);
    for i in 0..len {
        let v = signal.value_at(i as f64 / rate);
        if v.abs() > signal.s_max {
            return None;
        }
        values.push(v);
    }
    Some(DenseTrace::new(rate, 0, values))
}

/// Evaluates the signal at `k / rate` for `k < rate * duration`.
pub fn eval_trace(signal: &impl Waveform, rate: f64) -> DenseTrace {
    let len = (rate * signal.duration()).round() as usize;
    signal.sample(rate, 0, len)
}

/// Largest ratio of the finite-difference slope to the pointwise bound
/// `2 pi s_max W`, taking the larger `W` of each interval's endpoints.
pub fn max_slope_ratio(trace: &DenseTrace, profile: &BandwidthProfile, s_max: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut w_prev = profile.inst_bandwidth(trace.time_at(0));
    for (i, pair) in trace.values.windows(2).enumerate() {
        let w_next = profile.inst_bandwidth(trace.time_at(i + 1));
        let slope = (pair[1] - pair[0]).abs() * trace.rate;
        worst = worst.max(slope / (2.0 * PI * s_max * w_prev.max(w_next)));
        w_prev = w_next;
    }
    worst
}

/// Mean of `s^2` over the trace.
pub fn mean_power(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}
