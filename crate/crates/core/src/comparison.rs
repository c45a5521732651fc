//! Reading both systems' NMSE-versus-rate curves at a target NMSE and
//! forming the relative power and bandwidth figures.

use serde::{Deserialize, Serialize};

use crate::metrics::{b_rel, b_rel_worst, p_rel};
use crate::reconstruction::Source;
use crate::sweep::{SweepConfig, SweepRecord};
use crate::{S_MAX, W_MAX};

/// Cheapest WSK operating point reaching a target NMSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WskChoice {
    pub n_bits: u32,
    pub f_s: f64,
    pub r_symbol: f64,
    /// false when the first grid point already met the target and no
    /// bracket was available
    pub interpolated: bool,
}

/// The EBC curve read at a target NMSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EbcPoint {
    pub r_event: f64,
    pub t_min: Option<f64>,
    pub delta_l: f64,
}

/// Interpolates `y` against `x` between two knots, in log-log space when
/// all four values are positive and linearly otherwise.
fn interp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    if x0 == x1 {
        return y0;
    }
    if x0 > 0.0 && x1 > 0.0 && y0 > 0.0 && y1 > 0.0 && x > 0.0 {
        let u = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
        (y0.ln() + u * (y1.ln() - y0.ln())).exp()
    } else {
        let u = (x - x0) / (x1 - x0);
        y0 + u * (y1 - y0)
    }
}

/// Lowest symbol rate reaching `target` at this profile.
///
/// Within each bit depth the records are walked in order of increasing
/// sampling rate; the first one meeting the target and its predecessor
/// bracket the crossing, interpolated in log NMSE against log rate. The
/// cheapest bit depth wins. `None` if no record meets the target.
pub fn wsk_best_at(records: &[SweepRecord], w_mean: f64, target: f64) -> Option<WskChoice> {
    let mut wsk: Vec<&SweepRecord> =
        records.iter().filter(|r| r.system == Source::Wsk && r.w_mean == w_mean).collect();
    wsk.sort_by(|a, b| a.n_bits.cmp(&b.n_bits).then(a.rate.total_cmp(&b.rate)));

    let mut best: Option<WskChoice> = None;
    for group in wsk.chunk_by(|a, b| a.n_bits == b.n_bits) {
        let Some(i) = group.iter().position(|r| r.nmse <= target) else { continue };
        let hit = group[i];
        let n_bits = hit.n_bits.unwrap_or(1);
        let choice = if i > 0 && hit.nmse > 0.0 {
            let prev = group[i - 1];
            let r = interp(prev.nmse, prev.rate, hit.nmse, hit.rate, target);
            WskChoice { n_bits, f_s: r / n_bits as f64, r_symbol: r, interpolated: true }
        } else {
            WskChoice { n_bits, f_s: hit.rate / n_bits as f64, r_symbol: hit.rate, interpolated: false }
        };
        if best.is_none_or(|b| choice.r_symbol < b.r_symbol) {
            best = Some(choice);
        }
    }
    best
}

/// The EBC curve at `target`, walking the level spacings from coarse to
/// fine. `None` when the target lies outside the span of the curve.
pub fn ebc_at(records: &[SweepRecord], w_mean: f64, target: f64) -> Option<EbcPoint> {
    let mut ebc: Vec<&SweepRecord> =
        records.iter().filter(|r| r.system == Source::Ebc && r.w_mean == w_mean).collect();
    ebc.sort_by(|a, b| b.delta_l.unwrap_or(0.0).total_cmp(&a.delta_l.unwrap_or(0.0)));

    let i = ebc.iter().position(|r| r.nmse <= target)?;
    let hit = ebc[i];
    let point = |r: &SweepRecord| EbcPoint {
        r_event: r.rate,
        t_min: r.t_min_mean,
        delta_l: r.delta_l.unwrap_or(0.0),
    };
    if hit.nmse == target {
        return Some(point(hit));
    }
    if i == 0 {
        return None;
    }
    let prev = ebc[i - 1];
    let at = |y0: f64, y1: f64| interp(prev.nmse, y0, hit.nmse, y1, target);
    Some(EbcPoint {
        r_event: at(prev.rate, hit.rate),
        t_min: match (prev.t_min_mean, hit.t_min_mean) {
            (Some(a), Some(b)) => Some(at(a, b)),
            _ => None,
        },
        delta_l: at(prev.delta_l.unwrap_or(0.0), hit.delta_l.unwrap_or(0.0)),
    })
}

/// One profile and target NMSE. Figures are `None` when either system
/// cannot reach the target or (for bandwidth) the event spacing is
/// undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub w_mean: f64,
    pub target_nmse: f64,
    pub p_rel: Option<f64>,
    pub b_rel: Option<f64>,
    pub b_rel_worst: Option<f64>,
    pub n_bits: Option<u32>,
    pub f_s: Option<f64>,
    pub r_symbol: Option<f64>,
    pub delta_l: Option<f64>,
    pub r_event: Option<f64>,
    pub t_min: Option<f64>,
    /// the WSK pair was read off a grid point without a bracket
    pub wsk_fallback: bool,
}

impl ComparisonRow {
    pub fn attainable(&self) -> bool {
        self.p_rel.is_some()
    }
}

/// Compares both systems at one profile and target.
pub fn compare_at(records: &[SweepRecord], w_mean: f64, target: f64) -> ComparisonRow {
    let wsk = wsk_best_at(records, w_mean, target);
    let ebc = ebc_at(records, w_mean, target);
    let mut row = ComparisonRow {
        w_mean,
        target_nmse: target,
        p_rel: None,
        b_rel: None,
        b_rel_worst: None,
        n_bits: wsk.map(|w| w.n_bits),
        f_s: wsk.map(|w| w.f_s),
        r_symbol: wsk.map(|w| w.r_symbol),
        delta_l: ebc.map(|e| e.delta_l),
        r_event: ebc.map(|e| e.r_event),
        t_min: ebc.and_then(|e| e.t_min),
        wsk_fallback: wsk.is_some_and(|w| !w.interpolated),
    };
    if let (Some(w), Some(e)) = (wsk, ebc) {
        row.p_rel = Some(p_rel(e.r_event, w.n_bits, w.f_s));
        row.b_rel = e.t_min.filter(|&t| t > 0.0).map(|t| b_rel(t, w.n_bits, w.f_s));
        row.b_rel_worst = Some(b_rel_worst(e.delta_l, w.n_bits, w.f_s, S_MAX, W_MAX));
    }
    row
}

/// Rows for every profile and target of the sweep configuration, in
/// configuration order.
pub fn build_comparison(records: &[SweepRecord], config: &SweepConfig) -> Vec<ComparisonRow> {
    config
        .w_mean_list
        .iter()
        .flat_map(|&w| config.target_nmse_list.iter().map(move |&t| compare_at(records, w, t)))
        .collect()
}
