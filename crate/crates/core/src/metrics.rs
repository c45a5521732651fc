//! Reconstruction error and the relative efficiency figures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-signal NMSE, `sum |s - s_hat|^2 / sum |s|^2`.
pub fn nmse(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::LengthMismatch { reference: reference.len(), estimate: estimate.len() });
    }
    let energy: f64 = reference.iter().map(|s| s * s).sum();
    if energy == 0.0 {
        return Err(Error::ZeroEnergyReference);
    }
    let err: f64 = reference.iter().zip(estimate).map(|(s, e)| (s - e) * (s - e)).sum();
    Ok(err / energy)
}

/// Pointwise-normalized variant, `mean_n |s - s_hat|^2 / |s|^2`, skipping
/// points where the reference is exactly zero. Heavy-tailed near zero
/// crossings; kept for comparison only.
pub fn nmse_pointwise(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::LengthMismatch { reference: reference.len(), estimate: estimate.len() });
    }
    let (sum, count) = reference
        .iter()
        .zip(estimate)
        .filter(|(s, _)| **s != 0.0)
        .fold((0.0, 0usize), |(acc, n), (s, e)| (acc + (s - e) * (s - e) / (s * s), n + 1));
    if count == 0 {
        return Err(Error::ZeroEnergyReference);
    }
    Ok(sum / count as f64)
}

/// Mean of per-signal values in index order.
pub fn ensemble_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Relative transmit power: events per second over bits per second.
pub fn p_rel(r_event: f64, n_bits: u32, f_s: f64) -> f64 {
    r_event / (n_bits as f64 * f_s)
}

/// Relative transmit bandwidth: pulse duration `t_min` against the
/// symbol duration `1 / (n_bits f_s)`.
pub fn b_rel(t_min: f64, n_bits: u32, f_s: f64) -> f64 {
    1.0 / (t_min * n_bits as f64 * f_s)
}

/// Bandwidth when pulses are sized for the provable minimum spacing.
pub fn b_rel_worst(delta_l: f64, n_bits: u32, f_s: f64, s_max: f64, w_max: f64) -> f64 {
    2.0 * PI * s_max * w_max / (delta_l * n_bits as f64 * f_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyFigures {
    pub p_rel: f64,
    pub b_rel: f64,
    pub b_rel_worst: f64,
    pub t_min: f64,
    pub r_event: f64,
    pub r_symbol: f64,
}

impl EfficiencyFigures {
    pub fn new(r_event: f64, t_min: f64, delta_l: f64, n_bits: u32, f_s: f64, s_max: f64, w_max: f64) -> Self {
        Self {
            p_rel: p_rel(r_event, n_bits, f_s),
            b_rel: b_rel(t_min, n_bits, f_s),
            b_rel_worst: b_rel_worst(delta_l, n_bits, f_s, s_max, w_max),
            t_min,
            r_event,
            r_symbol: n_bits as f64 * f_s,
        }
    }
}
