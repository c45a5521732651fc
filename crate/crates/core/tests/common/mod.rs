//! Shared fixtures and a brute-force send-on-delta reference encoder.
#![allow(dead_code)]

use std::f64::consts::PI;

use ebcsim::signal_model::Waveform;
use ebcsim::sod::{Direction, EventStream, SodConfig};

pub struct Ramp;

impl Waveform for Ramp {
    fn value_at(&self, t: f64) -> f64 {
        8.0 * t - 4.0
    }
    fn duration(&self) -> f64 {
        1.0
    }
    fn slope_bound(&self) -> f64 {
        8.0
    }
    fn curvature_bound(&self) -> f64 {
        0.0
    }
}

/// `3.5 sin(2 pi t)`, with the phase reduced so whole periods hit zero
/// exactly.
pub struct Sine;

impl Waveform for Sine {
    fn value_at(&self, t: f64) -> f64 {
        3.5 * (2.0 * PI * (t - t.round())).sin()
    }
    fn duration(&self) -> f64 {
        1.0
    }
    fn slope_bound(&self) -> f64 {
        3.5 * 2.0 * PI
    }
    fn curvature_bound(&self) -> f64 {
        3.5 * 4.0 * PI * PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEvent {
    pub time: f64,
    pub up: bool,
    pub level: i64,
}

/// Steps through `[0, duration]` on a uniform grid at `rate`, comparing
/// each sample against the levels next to the current reference. Each
/// crossing is then timed by bisection on the waveform itself. The grid
/// must be fine enough that one step never spans two levels.
pub fn brute_force_sod<W: Waveform + ?Sized>(signal: &W, config: &SodConfig, rate: f64) -> (usize, Vec<OracleEvent>) {
    let n = config.n_levels as i64;
    let level_at = |k: i64| config.s_max * (2 * k - (n - 1)) as f64 / (n - 1) as f64;
    let steps = (rate * signal.duration()).round() as i64;

    let v0 = signal.value_at(0.0);
    let mut level = 0i64;
    for k in 1..n {
        if (level_at(k) - v0).abs() < (level_at(level) - v0).abs() {
            level = k;
        }
    }
    let initial = level as usize;

    let mut events = Vec::new();
    let mut t_prev = 0.0;
    for i in 1..=steps {
        let t = i as f64 / rate;
        let v = signal.value_at(t);
        let up = level + 1 < n && v >= level_at(level + 1);
        let down = level > 0 && v <= level_at(level - 1);
        if up || down {
            let thr = if up { level_at(level + 1) } else { level_at(level - 1) };
            let sign = if up { 1.0 } else { -1.0 };
            let (mut lo, mut hi) = (t_prev, t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if sign * (signal.value_at(mid) - thr) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            level += if up { 1 } else { -1 };
            events.push(OracleEvent { time: hi, up, level });
        }
        t_prev = t;
    }
    (initial, events)
}

/// First disagreement between an encoder stream and the oracle, if any.
pub fn compare_with_oracle(stream: &EventStream, oracle: &(usize, Vec<OracleEvent>), time_tol: f64) -> Option<String> {
    let (initial, events) = oracle;
    if stream.initial_level != *initial {
        return Some(format!("initial level {} vs {}", stream.initial_level, initial));
    }
    if stream.events.len() != events.len() {
        return Some(format!("{} events vs {}", stream.events.len(), events.len()));
    }
    let mut level = stream.initial_level as i64;
    for (i, (e, o)) in stream.events.iter().zip(events).enumerate() {
        level += e.direction.sign();
        if level != o.level || (e.direction == Direction::Up) != o.up {
            return Some(format!("event {i}: level {level} vs {}", o.level));
        }
        if (e.time - o.time).abs() > time_tol {
            return Some(format!("event {i}: time {} vs {}", e.time, o.time));
        }
    }
    None
}
