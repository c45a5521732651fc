//! Send-on-delta sampling with one-bit events.
//!
//! Levels are equidistant over `[-s_max, s_max]` including both ends. After
//! the initial reference (the level nearest to `s(0)`, carried as side
//! information), an event fires whenever the signal reaches one of the two
//! levels adjacent to the current reference; the event carries only its
//! direction.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::signal_model::{DenseTrace, Waveform};
use crate::{Error, Result, GRID_RATE};

/// Check and detection grid rate for the finest standard level grid
/// (`N_L = 100`): the smallest multiple of 16 kHz giving at least four
/// points per worst-case level traversal.
pub const DEFAULT_SYNTHESIS_RATE: f64 = 1_248_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SodConfig {
    pub n_levels: usize,
    pub delta_l: f64,
    pub s_max: f64,
}

impl SodConfig {
    pub fn new(n_levels: usize, s_max: f64) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::TooFewLevels(n_levels));
        }
        Ok(Self { n_levels, delta_l: 2.0 * s_max / (n_levels - 1) as f64, s_max })
    }

    /// Amplitude of level `k`; exact at both ends of the range.
    #[inline]
    pub fn level_value(&self, k: usize) -> f64 {
        let span = (self.n_levels - 1) as f64;
        self.s_max * (2.0 * k as f64 - span) / span
    }

    /// Nearest level, ties resolved toward the negative side.
    pub fn nearest_level(&self, v: f64) -> usize {
        let pos = (v + self.s_max) / self.delta_l;
        let k = (pos - 0.5).ceil();
        k.clamp(0.0, (self.n_levels - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn sign(self) -> i64 {
        match self {
            Direction::Up => 1,
            Direction::Down => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub initial_level: usize,
    pub events: Vec<Event>,
    pub duration: f64,
}

impl EventStream {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Test-vector text: an `initial_level=<k>` header, then one
    /// `time,direction` line per event with 9 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("initial_level={}\n", self.initial_level);
        for e in &self.events {
            let _ = writeln!(out, "{:.8e},{}", e.time, e.direction.sign());
        }
        out
    }

    pub fn from_text(text: &str, duration: f64) -> std::result::Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or("missing initial_level header")?;
        let initial_level = header
            .trim()
            .strip_prefix("initial_level=")
            .ok_or_else(|| format!("bad header {header:?}"))?
            .parse::<usize>()
            .map_err(|e| e.to_string())?;
        let mut events = Vec::new();
        for line in lines {
            let (t, d) = line.trim().split_once(',').ok_or_else(|| format!("bad line {line:?}"))?;
            let time = t.trim().parse::<f64>().map_err(|e| format!("{line:?}: {e}"))?;
            let direction = match d.trim() {
                "1" | "+1" => Direction::Up,
                "-1" => Direction::Down,
                other => return Err(format!("bad direction {other:?}")),
            };
            events.push(Event { time, direction });
        }
        Ok(Self { initial_level, events, duration })
    }
}

/// Reconstructed amplitudes at the event instants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NonuniformSamples {
    pub points: Vec<(f64, f64)>,
}

impl NonuniformSamples {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Smallest multiple of [`GRID_RATE`] with at least four grid points per
/// fastest possible traversal of one level step.
pub fn detection_rate(delta_l: f64, slope_bound: f64) -> f64 {
    let per_level = 4.0 * slope_bound / delta_l;
    GRID_RATE * (per_level / GRID_RATE).ceil().max(1.0)
}

/// Encodes a waveform on its own detection grid over `[0, duration]`.
pub fn sod_encode<W: Waveform + ?Sized>(signal: &W, config: &SodConfig) -> EventStream {
    let rate = detection_rate(config.delta_l, signal.slope_bound());
    let len = (rate * signal.duration()).round() as usize + 1;
    let trace = signal.sample(rate, 0, len);
    encode_trace(signal, &trace, config)
}

/// Encodes using precomputed grid samples of `signal` (starting at t = 0).
///
/// Crossings are bracketed on the grid and timed by linear inverse
/// interpolation. Sampled extrema that come within the curvature margin of
/// the next level are refined on the waveform itself, so crossings that
/// peak between grid points are not lost.
pub fn encode_trace<W: Waveform + ?Sized>(
    signal: &W,
    trace: &DenseTrace,
    config: &SodConfig,
) -> EventStream {
    let v = &trace.values;
    let duration = signal.duration();
    if v.is_empty() {
        return EventStream { initial_level: config.nearest_level(0.0), events: vec![], duration };
    }
    let h = 1.0 / trace.rate;
    let margin = 0.5 * signal.curvature_bound() * h * h;
    let top = config.n_levels - 1;
    let initial_level = config.nearest_level(v[0]);
    let mut level = initial_level;
    let mut events: Vec<Event> = Vec::new();

    for i in 1..v.len() {
        let (a, b) = (v[i - 1], v[i]);
        let ta = trace.time_at(i - 1);
        loop {
            if level < top {
                let thr = config.level_value(level + 1);
                if b >= thr {
                    let time = ta + h * (thr - a) / (b - a);
                    events.push(Event { time, direction: Direction::Up });
                    level += 1;
                    continue;
                }
            }
            if level > 0 {
                let thr = config.level_value(level - 1);
                if b <= thr {
                    let time = ta + h * (thr - a) / (b - a);
                    events.push(Event { time, direction: Direction::Down });
                    level -= 1;
                    continue;
                }
            }
            break;
        }

        if i + 1 >= v.len() || margin <= 0.0 {
            continue;
        }
        let (prev, cur, next) = (a, b, v[i + 1]);
        let lo = events.last().map_or(ta, |e| e.time.max(ta));
        let hi = trace.time_at(i + 1);
        if level < top && cur >= prev && cur >= next {
            let thr = config.level_value(level + 1);
            if cur < thr && cur > thr - margin {
                if let Some(time) = grazing_crossing(signal, lo, hi, thr, 1.0) {
                    events.push(Event { time, direction: Direction::Up });
                    level += 1;
                }
            }
        } else if level > 0 && cur <= prev && cur <= next {
            let thr = config.level_value(level - 1);
            if cur > thr && cur < thr + margin {
                if let Some(time) = grazing_crossing(signal, lo, hi, thr, -1.0) {
                    events.push(Event { time, direction: Direction::Down });
                    level -= 1;
                }
            }
        }
    }
    EventStream { initial_level, events, duration }
}

/// Locates the extremum of `sign * s` on `[lo, hi]` by golden-section
/// search and, if it reaches `thr`, the first instant it does.
fn grazing_crossing<W: Waveform + ?Sized>(
    signal: &W,
    lo: f64,
    hi: f64,
    thr: f64,
    sign: f64,
) -> Option<f64> {
    let f = |t: f64| sign * signal.value_at(t);
    let target = sign * thr;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let peak_t = 0.5 * (a + b);
    if f(peak_t) < target || f(lo) >= target {
        return None;
    }
    let (mut below, mut above) = (lo, peak_t);
    for _ in 0..60 {
        let mid = 0.5 * (below + above);
        if f(mid) >= target {
            above = mid;
        } else {
            below = mid;
        }
    }
    Some(above)
}

/// Cumulative level walk from the initial reference.
pub fn events_to_samples(stream: &EventStream, config: &SodConfig) -> Result<NonuniformSamples> {
    let mut level = stream.initial_level as i64;
    let top = config.n_levels as i64 - 1;
    let mut points = Vec::with_capacity(stream.events.len());
    for (index, e) in stream.events.iter().enumerate() {
        level += e.direction.sign();
        if !(0..=top).contains(&level) {
            return Err(Error::CorruptEventStream { index, level });
        }
        points.push((e.time, config.level_value(level as usize)));
    }
    Ok(NonuniformSamples { points })
}

/// Level indices visited after each event.
pub fn level_sequence(stream: &EventStream) -> Vec<i64> {
    stream
        .events
        .iter()
        .scan(stream.initial_level as i64, |lvl, e| {
            *lvl += e.direction.sign();
            Some(*lvl)
        })
        .collect()
}

/// Lower bound on the spacing of consecutive events,
/// `delta_l / (2 pi s_max w_max)`.
pub fn t_lb(config: &SodConfig, s_max: f64, w_max: f64) -> f64 {
    config.delta_l / (2.0 * PI * s_max * w_max)
}

/// Smallest spacing between consecutive events; `None` with fewer than two.
pub fn min_gap(stream: &EventStream) -> Option<f64> {
    stream
        .events
        .windows(2)
        .map(|w| w[1].time - w[0].time)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |m| m.min(g))))
}

/// Events per second.
pub fn event_rate(stream: &EventStream) -> f64 {
    stream.events.len() as f64 / stream.duration
}
