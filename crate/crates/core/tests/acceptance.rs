//! Acceptance suite. Runs one full Monte-Carlo sweep and checks every
//! criterion against it, printing one PASS/FAIL line per criterion.
//!
//! `EBCSIM_ACCEPTANCE_M` overrides the number of realizations (default
//! 100); below 100 the widened tolerance of criterion 3 applies.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use ebcsim::comparison::{compare_at, ebc_at, wsk_best_at, ComparisonRow};
use ebcsim::output::{emit_outputs, rounded};
use ebcsim::reconstruction::Source;
use ebcsim::signal_model::{eval_trace, mean_power, BandwidthProfile};
use ebcsim::sod::{sod_encode, t_lb, SodConfig};
use ebcsim::sweep::{log_spaced, realization, run_sweep_with, SweepConfig, SweepRecord, SweepResult};
use ebcsim::wsk::quantizer_step;
use ebcsim::{S_MAX, STANDARD_W_MEANS, W_MAX};

use common::{brute_force_sod, compare_with_oracle, Ramp, Sine};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
}

/// Targets outside the span of the EBC curve carry no figure and are
/// reported, not scored; at least 80% of each range must be attainable.
fn mostly_attainable(missing: usize, total: usize) -> bool {
    total > 0 && missing * 5 <= total
}

fn t_lb_invariant(result: &SweepResult) -> Outcome {
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for r in result.records.iter().filter(|r| r.system == Source::Ebc) {
        let config = SodConfig::new(r.n_levels.unwrap(), S_MAX).unwrap();
        let bound = t_lb(&config, S_MAX, W_MAX);
        if let Some(g) = r.min_gap_min {
            tightest = tightest.min(g / bound);
            if g < bound * (1.0 - 1e-6) {
                violations += 1;
            }
        }
    }
    Outcome::new(violations == 0, format!("{violations} violations; smallest gap / T_LB = {tightest:.3}"))
}

fn bernstein(result: &SweepResult) -> Outcome {
    let worst = result.diagnostics.iter().map(|d| d.max_slope_ratio).fold(0.0, f64::max);
    Outcome::new(worst <= 1.0 + 1e-3, format!("largest slope / (2 pi s_max W(t)) = {worst:.4}"))
}

fn energy_headline(records: &[SweepRecord], m: usize) -> Outcome {
    let limit = if m >= 100 { 0.55 } else { 0.6 };
    let targets = log_spaced(6e-3, 3e-1, 30);
    let rows: Vec<ComparisonRow> = targets.iter().map(|&t| compare_at(records, 325.0, t)).collect();
    let unattainable: Vec<String> =
        rows.iter().filter(|r| r.p_rel.is_none()).map(|r| format!("{:.3e}", r.target_nmse)).collect();
    let worst = rows.iter().filter_map(|r| r.p_rel).fold(0.0, f64::max);
    let below_half = rows.iter().filter(|r| r.p_rel.is_some_and(|p| p < 0.5)).count();
    Outcome::new(
        mostly_attainable(unattainable.len(), rows.len()) && worst <= limit,
        format!(
            "W=325, targets [6e-3, 3e-1]: max p_rel = {worst:.4} (limit {limit}), {below_half}/{} below 0.5, unattainable: [{}]",
            rows.len(),
            unattainable.join(" ")
        ),
    )
}

fn structure_degradation(records: &[SweepRecord]) -> Outcome {
    let lo = compare_at(records, 325.0, 3e-2).p_rel;
    let hi = compare_at(records, 925.0, 3e-2).p_rel;
    let pass = matches!((lo, hi), (Some(a), Some(b)) if b >= 1.2 * a);
    Outcome::new(pass, format!("p_rel at 3e-2: W=325 {}, W=925 {}", fmt_opt(lo), fmt_opt(hi)))
}

fn bandwidth_range(rows: &[ComparisonRow]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &w in &STANDARD_W_MEANS {
        let b: Vec<f64> = rows.iter().filter(|r| r.w_mean == w).filter_map(|r| r.b_rel).collect();
        let missing = rows.iter().filter(|r| r.w_mean == w && r.b_rel.is_none()).count();
        let (lo, hi) = b.iter().fold((f64::INFINITY, 0.0f64), |(a, c), &x| (a.min(x), c.max(x)));
        if b.is_empty() || lo <= 1.0 {
            pass = false;
        }
        if !mostly_attainable(missing, missing + b.len()) {
            pass = false;
        }
        if [625.0, 775.0, 925.0].contains(&w) && (lo < 3.0 || hi > 12.0) {
            pass = false;
        }
        parts.push(format!("W={w}: [{lo:.2}, {hi:.2}] ({missing} NA)"));
    }
    Outcome::new(pass, parts.join("; "))
}

fn worst_case_factor(rows: &[ComparisonRow]) -> Outcome {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| Some(r.b_rel_worst? / r.b_rel?)).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, c), &x| (a.min(x), c.max(x)));
    Outcome::new(
        !ratios.is_empty() && lo >= 1.4 && hi <= 2.8,
        format!("b_rel_worst / b_rel in [{lo:.3}, {hi:.3}] over {} rows", ratios.len()),
    )
}

fn quantization_floor(records: &[SweepRecord]) -> Outcome {
    let q = quantizer_step(8, S_MAX);
    let floor = q * q / 12.0;
    let rec = records
        .iter()
        .find(|r| r.system == Source::Wsk && r.w_mean == 475.0 && r.n_bits == Some(8) && r.n_os == Some(2.0));
    match rec {
        Some(r) => Outcome::new(
            r.nmse >= 0.5 * floor && r.nmse <= 3.0 * floor,
            format!("NMSE {:.4e}, q^2/12 = {floor:.4e}, ratio {:.3}", r.nmse, r.nmse / floor),
        ),
        None => Outcome::new(false, "no 8-bit N_os=2 record at W=475"),
    }
}

fn crossover(records: &[SweepRecord]) -> Outcome {
    let hits: Vec<(f64, f64, f64)> = log_spaced(1e-2, 1e-1, 41)
        .into_iter()
        .filter_map(|t| {
            let e = ebc_at(records, 475.0, t)?;
            let w = wsk_best_at(records, 475.0, t)?;
            (e.r_event < w.r_symbol).then_some((t, e.r_event, w.r_symbol))
        })
        .collect();
    match hits.first() {
        Some(&(t, e, w)) => Outcome::new(
            true,
            format!("{}/41 targets; e.g. NMSE {t:.3e}: EBC {e:.0} Hz < WSK {w:.0} Hz", hits.len()),
        ),
        None => Outcome::new(false, "EBC never below the best WSK rate in [1e-2, 1e-1]"),
    }
}

fn oracle_equivalence(seed: u64) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;

    let ramp = sod_encode(&Ramp, &SodConfig::new(10, S_MAX).unwrap());
    let sine_cfg = SodConfig::new(9, S_MAX).unwrap();
    let sine = sod_encode(&Sine, &sine_cfg);
    for (name, stream, oracle, want) in [
        ("ramp", &ramp, brute_force_sod(&Ramp, &SodConfig::new(10, S_MAX).unwrap(), 1e5), 9),
        ("sine", &sine, brute_force_sod(&Sine, &sine_cfg, 1e5), 12),
    ] {
        checked += 1;
        if stream.len() != want {
            failures.push(format!("{name}: {} events, expected {want}", stream.len()));
        }
        if let Some(d) = compare_with_oracle(stream, &oracle, 1e-6) {
            failures.push(format!("{name}: {d}"));
        }
    }

    let mut events = 0;
    for i in 0..20 {
        let w = STANDARD_W_MEANS[i % 5];
        let (signal, dense) = realization(seed ^ 0x5eed, w, i).unwrap();
        for n_levels in [10, 35, 100] {
            let config = SodConfig::new(n_levels, S_MAX).unwrap();
            let stream = ebcsim::sod::encode_trace(&signal, &dense, &config);
            let oracle = brute_force_sod(&signal, &config, 4.0 * dense.rate);
            events += stream.len();
            checked += 1;
            if let Some(d) = compare_with_oracle(&stream, &oracle, 1e-6) {
                failures.push(format!("signal {i} (W={w}, N_L={n_levels}): {d}"));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("{checked} streams, {events} random-signal events; {}", if failures.is_empty() {
            "all match".to_string()
        } else {
            failures.join("; ")
        }),
    )
}

fn determinism(config: &SweepConfig, first: &SweepResult) -> Outcome {
    let dirs = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let second = match run_sweep_with(config, Some(3)) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("second sweep failed: {e}")),
    };
    let (_, a) = emit_outputs(first, dirs.0.path()).unwrap();
    let (_, b) = emit_outputs(&second, dirs.1.path()).unwrap();
    let mut differing = Vec::new();
    for (pa, pb) in a.paths.iter().zip(&b.paths) {
        if fs::read(pa).unwrap() != fs::read(pb).unwrap() {
            differing.push(pa.file_name().unwrap().to_string_lossy().to_string());
        }
    }
    Outcome::new(
        differing.is_empty() && a.paths.len() == b.paths.len(),
        format!("{} files compared, default pool vs 3 workers; differing: [{}]", a.paths.len(), differing.join(" ")),
    )
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn signal_model_checks(result: &SweepResult, seed: u64) -> Outcome {
    let mut warp_err = 0.0f64;
    let mut peak_err = 0.0f64;
    for &w in &STANDARD_W_MEANS {
        let p = BandwidthProfile::new(w).unwrap();
        for t in [0.05, 0.3, 0.5, 0.77, 1.0] {
            let q = simpson(|x| p.inst_bandwidth(x), 0.0, t, 20_000);
            warp_err = warp_err.max((p.warp(t) - q).abs() / q);
        }
        let dense_peak = (0..=100_000).map(|i| p.inst_bandwidth(i as f64 / 100_000.0)).fold(0.0, f64::max);
        peak_err = peak_err.max((dense_peak - 1000.0).abs() / 1000.0);
    }

    let powers: Vec<(f64, f64)> = if result.config.m_realizations >= 100 {
        result.diagnostics.iter().map(|d| (d.w_mean, d.mean_power)).collect()
    } else {
        STANDARD_W_MEANS
            .iter()
            .map(|&w| {
                let sum: f64 = (0..100)
                    .map(|m| {
                        let (s, _) = realization(seed, w, m).unwrap();
                        mean_power(&eval_trace(&s, 16_000.0).values)
                    })
                    .sum();
                (w, sum / 100.0)
            })
            .collect()
    };
    let power_ok = powers.iter().all(|&(_, p)| (0.8..=1.2).contains(&p));
    let power_text: Vec<String> = powers.iter().map(|(w, p)| format!("{w}: {p:.3}")).collect();
    Outcome::new(
        warp_err <= 1e-6 && peak_err <= 1e-9 && power_ok,
        format!(
            "warp rel err {warp_err:.2e}, peak rel err {peak_err:.2e}, mean power {}",
            power_text.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let m = std::env::var("EBCSIM_ACCEPTANCE_M").ok().and_then(|v| v.parse().ok()).unwrap_or(100);
    let config = SweepConfig { master_seed: 2024, m_realizations: m, ..SweepConfig::default() };
    println!("acceptance: M = {m}, seed {}", config.master_seed);

    let start = Instant::now();
    let result = run_sweep_with(&config, None).expect("sweep");
    println!("sweep finished in {:.1?}", start.elapsed());
    let records = rounded(&result.records);
    let rows = ebcsim::comparison::build_comparison(&records, &config);

    type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        ("T_LB invariant", Box::new(|| t_lb_invariant(&result))),
        ("Bernstein slope bound", Box::new(|| bernstein(&result))),
        ("energy efficiency at W=325", Box::new(|| energy_headline(&records, m))),
        ("degradation with mean bandwidth", Box::new(|| structure_degradation(&records))),
        ("bandwidth efficiency range", Box::new(|| bandwidth_range(&rows))),
        ("worst-case bandwidth factor", Box::new(|| worst_case_factor(&rows))),
        ("8-bit quantization floor", Box::new(|| quantization_floor(&records))),
        ("EBC/WSK crossover at W=475", Box::new(|| crossover(&records))),
        ("oracle equivalence", Box::new(|| oracle_equivalence(config.master_seed))),
        ("determinism across worker counts", Box::new(|| determinism(&config, &result))),
        ("signal model checks", Box::new(|| signal_model_checks(&result, config.master_seed))),
    ];

    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
