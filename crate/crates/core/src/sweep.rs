//! Monte-Carlo sweep over test signals and system parameters.
//!
//! A work item is one realization of one bandwidth profile. Each item is
//! synthesized once and then run through every EBC and WSK configuration;
//! per-item results are reduced in index order so the outcome does not
//! depend on the number of workers.

use serde::{Deserialize, Serialize};

use crate::metrics::{ensemble_mean, nmse, nmse_pointwise};
use crate::par::ordered_map;
use crate::reconstruction::{reconstruct_ebc, SincInterpolator, Source};
use crate::signal_model::{
    eval_trace, Waveform, max_slope_ratio, mean_power, synthesize_vbw_with, BandwidthProfile, DenseTrace,
    SignalSeed, SynthesisOptions, VbwSignal,
};
use crate::sod::{encode_trace, event_rate, events_to_samples, min_gap, SodConfig};
use crate::wsk::{dequantize, filtered_samples, quantize, sampling_rate};
use crate::{Error, Result, GRID_RATE, S_MAX, STANDARD_W_MEANS, W_MAX};

fn default_n_os() -> Vec<f64> {
    (2..=20).map(|k| k as f64 / 10.0).collect()
}

fn default_targets() -> Vec<f64> {
    log_spaced(1e-3, 1e-1, 25)
}

/// `n` points from `lo` to `hi`, evenly spaced in log.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub master_seed: u64,
    pub m_realizations: usize,
    pub w_mean_list: Vec<f64>,
    /// oversampling factors; `f_s = 2 W_max N_os`
    pub n_os_list: Vec<f64>,
    pub n_bits_list: Vec<u32>,
    /// numbers of send-on-delta levels; `delta_l = 2 s_max / (N_L - 1)`
    pub n_levels_list: Vec<usize>,
    pub grid_rate: f64,
    pub target_nmse_list: Vec<f64>,
    /// use the pointwise-normalized error instead of ratio-of-sums
    pub pointwise_nmse: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            m_realizations: 20,
            w_mean_list: STANDARD_W_MEANS.to_vec(),
            n_os_list: default_n_os(),
            n_bits_list: (3..=8).collect(),
            n_levels_list: (10..=100).step_by(5).collect(),
            grid_rate: GRID_RATE,
            target_nmse_list: default_targets(),
            pointwise_nmse: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m_realizations == 0 {
            return bad("m_realizations must be at least 1".into());
        }
        for &w in &self.w_mean_list {
            BandwidthProfile::new(w)?;
        }
        if !(self.grid_rate > 0.0 && self.grid_rate.fract() == 0.0) {
            return bad(format!("grid_rate must be a positive whole number of Hz, got {}", self.grid_rate));
        }
        for &n in &self.n_os_list {
            let f_s = sampling_rate(n, W_MAX);
            if !(f_s >= 1.0 && n.is_finite()) {
                return bad(format!("oversampling factor {n} gives no usable sampling rate"));
            }
        }
        if let Some(b) = self.n_bits_list.iter().find(|&&b| b == 0 || b > 24) {
            return bad(format!("n_bits {b} outside 1..=24"));
        }
        if let Some(n) = self.n_levels_list.iter().find(|&&n| n < 2) {
            return Err(Error::TooFewLevels(*n));
        }
        if let Some(t) = self.target_nmse_list.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
            return bad(format!("target NMSE {t} must be positive"));
        }
        Ok(())
    }

    /// Sampling rates in sweep order, one per oversampling factor.
    pub fn sampling_rates(&self) -> Vec<f64> {
        self.n_os_list.iter().map(|&n| sampling_rate(n, W_MAX)).collect()
    }
}

/// One configuration of one system at one bandwidth profile, averaged over
/// the realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub system: Source,
    pub w_mean: f64,
    pub n_levels: Option<usize>,
    pub delta_l: Option<f64>,
    pub n_bits: Option<u32>,
    pub n_os: Option<f64>,
    pub f_s: Option<f64>,
    pub nmse: f64,
    /// event rate (EBC) or symbol rate (WSK) in Hz
    pub rate: f64,
    /// mean over realizations of the smallest event spacing (EBC); absent
    /// if any realization produced fewer than two events
    pub t_min_mean: Option<f64>,
    /// smallest event spacing seen in any realization (EBC)
    pub min_gap_min: Option<f64>,
}

/// Signal-level checks gathered alongside the sweep, per profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDiagnostics {
    pub w_mean: f64,
    /// largest finite-difference slope over `2 pi s_max W(t)`, over all
    /// realizations
    pub max_slope_ratio: f64,
    pub mean_power: f64,
    /// draws rejected for exceeding `s_max`, summed over realizations
    pub rejected_draws: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
    pub diagnostics: Vec<ProfileDiagnostics>,
}

impl SweepResult {
    pub fn records_for(&self, system: Source, w_mean: f64) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(move |r| r.system == system && r.w_mean == w_mean)
    }
}

#[derive(Debug, Clone, Copy)]
struct EbcOutcome {
    nmse: f64,
    rate: f64,
    min_gap: Option<f64>,
}

#[derive(Debug, Clone)]
struct ItemOutcome {
    /// indexed like `n_levels_list`
    ebc: Vec<EbcOutcome>,
    /// `n_os`-major, `n_bits`-minor
    wsk: Vec<f64>,
    max_slope_ratio: f64,
    power: f64,
    attempt: u32,
}

/// Runs the sweep on the default worker pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(config, None)
}

/// Runs the sweep with `threads` workers (`Some(1)` is sequential).
pub fn run_sweep_with(config: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    config.validate()?;
    let items: Vec<(usize, usize)> = (0..config.w_mean_list.len())
        .flat_map(|w| (0..config.m_realizations).map(move |m| (w, m)))
        .collect();
    let outcomes = ordered_map(&items, threads, |&(w, m)| {
        let w_mean = config.w_mean_list[w];
        run_item(config, w_mean, m).map_err(|e| Error::Realization {
            w_mean,
            realization: m,
            source: Box::new(e),
        })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let f_s_list = config.sampling_rates();
    for (w, chunk) in outcomes.chunks(config.m_realizations).enumerate() {
        let w_mean = config.w_mean_list[w];
        for (j, &n_levels) in config.n_levels_list.iter().enumerate() {
            let sod = SodConfig::new(n_levels, S_MAX)?;
            let per: Vec<EbcOutcome> = chunk.iter().map(|o| o.ebc[j]).collect();
            let gaps: Option<Vec<f64>> = per.iter().map(|o| o.min_gap).collect();
            records.push(SweepRecord {
                system: Source::Ebc,
                w_mean,
                n_levels: Some(n_levels),
                delta_l: Some(sod.delta_l),
                n_bits: None,
                n_os: None,
                f_s: None,
                nmse: ensemble_mean(&per.iter().map(|o| o.nmse).collect::<Vec<_>>()),
                rate: ensemble_mean(&per.iter().map(|o| o.rate).collect::<Vec<_>>()),
                t_min_mean: gaps.as_deref().map(ensemble_mean),
                min_gap_min: per.iter().filter_map(|o| o.min_gap).reduce(f64::min),
            });
        }
        for (i, (&n_os, &f_s)) in config.n_os_list.iter().zip(&f_s_list).enumerate() {
            for (b, &n_bits) in config.n_bits_list.iter().enumerate() {
                let k = i * config.n_bits_list.len() + b;
                let per: Vec<f64> = chunk.iter().map(|o| o.wsk[k]).collect();
                records.push(SweepRecord {
                    system: Source::Wsk,
                    w_mean,
                    n_levels: None,
                    delta_l: None,
                    n_bits: Some(n_bits),
                    n_os: Some(n_os),
                    f_s: Some(f_s),
                    nmse: ensemble_mean(&per),
                    rate: n_bits as f64 * f_s,
                    t_min_mean: None,
                    min_gap_min: None,
                });
            }
        }
        diagnostics.push(ProfileDiagnostics {
            w_mean,
            max_slope_ratio: chunk.iter().map(|o| o.max_slope_ratio).fold(0.0, f64::max),
            mean_power: ensemble_mean(&chunk.iter().map(|o| o.power).collect::<Vec<_>>()),
            rejected_draws: chunk.iter().map(|o| o.attempt as u64).sum(),
        });
    }
    Ok(SweepResult { config: config.clone(), records, diagnostics })
}

/// The accepted realization `m` of profile `w_mean` under `master_seed`,
/// with its trace on the detection grid.
pub fn realization(master_seed: u64, w_mean: f64, m: usize) -> Result<(VbwSignal, DenseTrace)> {
    let profile = BandwidthProfile::new(w_mean)?;
    let seed = SignalSeed::for_realization(master_seed, w_mean, m);
    synthesize_vbw_with(&profile, seed, &SynthesisOptions::default())
}

fn reference_trace(signal: &VbwSignal, dense: &DenseTrace, grid_rate: f64) -> Vec<f64> {
    let len = (grid_rate * signal.duration()).round() as usize;
    let ratio = dense.rate / grid_rate;
    if ratio.fract() == 0.0 && dense.start == 0 {
        return dense.decimate(0, ratio as usize, len);
    }
    eval_trace(signal, grid_rate).values
}

fn run_item(config: &SweepConfig, w_mean: f64, m: usize) -> Result<ItemOutcome> {
    let (signal, dense) = realization(config.master_seed, w_mean, m)?;
    let reference = reference_trace(&signal, &dense, config.grid_rate);
    let error = |est: &[f64]| {
        if config.pointwise_nmse {
            nmse_pointwise(&reference, est)
        } else {
            nmse(&reference, est)
        }
    };

    let mut ebc = Vec::with_capacity(config.n_levels_list.len());
    for &n_levels in &config.n_levels_list {
        let sod = SodConfig::new(n_levels, S_MAX)?;
        let stream = encode_trace(&signal, &dense, &sod);
        let samples = events_to_samples(&stream, &sod)?;
        let est = reconstruct_ebc(&samples, config.grid_rate, stream.duration);
        ebc.push(EbcOutcome {
            nmse: error(&est.values)?,
            rate: event_rate(&stream),
            min_gap: min_gap(&stream),
        });
    }

    let mut wsk = Vec::with_capacity(config.n_os_list.len() * config.n_bits_list.len());
    for f_s in config.sampling_rates() {
        let samples = filtered_samples(&signal, f_s)?;
        let n_out = reference.len();
        let plan = SincInterpolator::new(f_s, config.grid_rate, samples.len(), n_out);
        for &n_bits in &config.n_bits_list {
            let values: Vec<f64> =
                samples.iter().map(|&x| dequantize(quantize(x, n_bits, S_MAX), n_bits, S_MAX)).collect();
            let est = match &plan {
                Some(p) => p.apply(&values),
                None => crate::reconstruction::sinc_interpolate(&values, f_s, config.grid_rate, 1.0),
            };
            wsk.push(error(&est)?);
        }
    }

    Ok(ItemOutcome {
        ebc,
        wsk,
        max_slope_ratio: max_slope_ratio(&dense, signal.profile(), signal.s_max()),
        power: mean_power(&reference),
        attempt: signal.seed().map_or(0, |s| s.attempt),
    })
}
