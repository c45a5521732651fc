//! Flat-file outputs: plot-ready CSV tables, the full record table, the run
//! manifest, and sweep configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::comparison::{build_comparison, ComparisonRow};
use crate::sweep::{ProfileDiagnostics, SweepConfig, SweepRecord, SweepResult};
use crate::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const FIG5_FILE: &str = "fig5.csv";
pub const FIG6_FILE: &str = "fig6.csv";
const NA: &str = "NA";

/// Nine significant digits in scientific notation.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.8e}")
}

/// `x` as it reads back from [`fmt_sig`].
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

fn opt_sig(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), fmt_sig)
}

fn opt_int<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Bandwidth value as used in file names: `325`, or `512.5`.
pub fn w_mean_label(w_mean: f64) -> String {
    format!("{w_mean}")
}

pub fn fig4_file(w_mean: f64) -> String {
    format!("fig4_{}.csv", w_mean_label(w_mean))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Parse { path: path.to_path_buf(), message: e.to_string() }
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Records with every float rounded as it will be written, so that tables
/// derived before and after a save/load cycle agree exactly.
pub fn rounded(records: &[SweepRecord]) -> Vec<SweepRecord> {
    records
        .iter()
        .map(|r| SweepRecord {
            delta_l: r.delta_l.map(round_sig),
            n_os: r.n_os.map(round_sig),
            f_s: r.f_s.map(round_sig),
            nmse: round_sig(r.nmse),
            rate: round_sig(r.rate),
            t_min_mean: r.t_min_mean.map(round_sig),
            min_gap_min: r.min_gap_min.map(round_sig),
            ..r.clone()
        })
        .collect()
}

/// `system,n_bits,rate_hz,nmse` for one profile. EBC rows leave `n_bits`
/// empty.
pub fn write_fig4(path: &Path, records: &[SweepRecord], w_mean: f64) -> Result<()> {
    let rows = records.iter().filter(|r| r.w_mean == w_mean).map(|r| {
        vec![r.system.to_string(), opt_int(r.n_bits), fmt_sig(r.rate), fmt_sig(r.nmse)]
    });
    write_table(path, &["system", "n_bits", "rate_hz", "nmse"], rows)
}

/// `w_mean,target_nmse,p_rel`; unattainable targets read `NA`.
pub fn write_fig5(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let out = rows.iter().map(|r| vec![fmt_sig(r.w_mean), fmt_sig(r.target_nmse), opt_sig(r.p_rel)]);
    write_table(path, &["w_mean", "target_nmse", "p_rel"], out)
}

/// `w_mean,target_nmse,b_rel,b_rel_worst`.
pub fn write_fig6(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let out = rows.iter().map(|r| {
        vec![fmt_sig(r.w_mean), fmt_sig(r.target_nmse), opt_sig(r.b_rel), opt_sig(r.b_rel_worst)]
    });
    write_table(path, &["w_mean", "target_nmse", "b_rel", "b_rel_worst"], out)
}

const COMPARISON_HEADER: [&str; 12] = [
    "w_mean",
    "target_nmse",
    "p_rel",
    "b_rel",
    "b_rel_worst",
    "n_bits",
    "f_s",
    "r_symbol",
    "delta_l",
    "r_event",
    "t_min",
    "wsk_fallback",
];

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let out = rows.iter().map(|r| {
        vec![
            fmt_sig(r.w_mean),
            fmt_sig(r.target_nmse),
            opt_sig(r.p_rel),
            opt_sig(r.b_rel),
            opt_sig(r.b_rel_worst),
            r.n_bits.map_or_else(|| NA.to_string(), |b| b.to_string()),
            opt_sig(r.f_s),
            opt_sig(r.r_symbol),
            opt_sig(r.delta_l),
            opt_sig(r.r_event),
            opt_sig(r.t_min),
            r.wsk_fallback.to_string(),
        ]
    });
    write_table(path, &COMPARISON_HEADER, out)
}

const RECORD_HEADER: [&str; 11] = [
    "system",
    "w_mean",
    "n_levels",
    "delta_l",
    "n_bits",
    "n_os",
    "f_s",
    "nmse",
    "rate",
    "t_min_mean",
    "min_gap_min",
];

/// Every sweep record; optional fields are left empty.
pub fn write_records(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let opt = |x: Option<f64>| x.map_or_else(String::new, fmt_sig);
    let out = records.iter().map(|r| {
        vec![
            r.system.to_string(),
            fmt_sig(r.w_mean),
            opt_int(r.n_levels),
            opt(r.delta_l),
            opt_int(r.n_bits),
            opt(r.n_os),
            opt(r.f_s),
            fmt_sig(r.nmse),
            fmt_sig(r.rate),
            opt(r.t_min_mean),
            opt(r.min_gap_min),
        ]
    });
    write_table(path, &RECORD_HEADER, out)
}

pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<Vec<SweepRecord>, _>>().map_err(csv_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHashes {
    pub w_mean_list: String,
    pub n_os_list: String,
    pub n_bits_list: String,
    pub n_levels_list: String,
    pub target_nmse_list: String,
}

fn hash_list<T: ToString>(values: &[T]) -> String {
    let joined = values.iter().map(T::to_string).collect::<Vec<_>>().join(",");
    Sha256::digest(joined.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl GridHashes {
    pub fn of(config: &SweepConfig) -> Self {
        Self {
            w_mean_list: hash_list(&config.w_mean_list),
            n_os_list: hash_list(&config.n_os_list),
            n_bits_list: hash_list(&config.n_bits_list),
            n_levels_list: hash_list(&config.n_levels_list),
            target_nmse_list: hash_list(&config.target_nmse_list),
        }
    }
}

/// Everything needed to rerun or re-report a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub master_seed: u64,
    pub config: SweepConfig,
    pub grid_hashes: GridHashes,
    pub record_count: usize,
    /// comparison rows whose WSK point is a grid point without a bracket
    pub wsk_fallback_rows: usize,
    pub unattainable_rows: usize,
    pub diagnostics: Vec<ProfileDiagnostics>,
}

impl RunManifest {
    pub fn new(result: &SweepResult, rows: &[ComparisonRow]) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: result.config.master_seed,
            config: result.config.clone(),
            grid_hashes: GridHashes::of(&result.config),
            record_count: result.records.len(),
            wsk_fallback_rows: rows.iter().filter(|r| r.wsk_fallback).count(),
            unattainable_rows: rows.iter().filter(|r| !r.attainable()).count(),
            diagnostics: result.diagnostics.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }
}

/// Files written by [`emit_outputs`], in writing order.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub paths: Vec<PathBuf>,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// The comparison tables (fig5, fig6, full comparison) for `rows`.
pub fn write_comparison_tables(dir: &Path, rows: &[ComparisonRow], written: &mut Written) -> Result<()> {
    create_dir(dir)?;
    for (name, f) in [
        (FIG5_FILE, write_fig5 as fn(&Path, &[ComparisonRow]) -> Result<()>),
        (FIG6_FILE, write_fig6),
        (COMPARISON_FILE, write_comparison),
    ] {
        let p = dir.join(name);
        f(&p, rows)?;
        written.paths.push(p);
    }
    Ok(())
}

/// Writes all tables and the manifest for a finished sweep. Returns the
/// comparison rows, computed from the records as written.
pub fn emit_outputs(result: &SweepResult, dir: &Path) -> Result<(Vec<ComparisonRow>, Written)> {
    create_dir(dir)?;
    let mut written = Written::default();
    let records = rounded(&result.records);
    for &w in &result.config.w_mean_list {
        let p = dir.join(fig4_file(w));
        write_fig4(&p, &records, w)?;
        written.paths.push(p);
    }
    let rows = build_comparison(&records, &result.config);
    write_comparison_tables(dir, &rows, &mut written)?;
    let p = dir.join(RECORDS_FILE);
    write_records(&p, &records)?;
    written.paths.push(p);
    let p = dir.join(MANIFEST_FILE);
    RunManifest::new(result, &rows).write(&p)?;
    written.paths.push(p);
    Ok((rows, written))
}

/// Comparison rows from a saved sweep directory.
pub fn load_comparison(dir: &Path) -> Result<(RunManifest, Vec<SweepRecord>, Vec<ComparisonRow>)> {
    let manifest = RunManifest::read(&dir.join(MANIFEST_FILE))?;
    let records = read_records(&dir.join(RECORDS_FILE))?;
    let rows = build_comparison(&records, &manifest.config);
    Ok((manifest, records, rows))
}

const LIST_KEYS: [&str; 5] = ["w_mean_list", "n_os_list", "n_bits_list", "n_levels_list", "target_nmse_list"];

fn parse_scalar(s: &str) -> Option<Value> {
    let s = s.trim();
    match s {
        "true" => return Some(Value::Bool(true)),
        "false" => return Some(Value::Bool(false)),
        _ => {}
    }
    if let Ok(u) = s.parse::<u64>() {
        return Some(Value::from(u));
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite()).map(Value::from)
}

/// Parses a sweep configuration from JSON or from `key = value` lines.
/// Lists are comma-separated, optionally in brackets; `#` starts a
/// comment. Missing keys take their defaults.
pub fn parse_config(text: &str, path: &Path) -> Result<SweepConfig> {
    let parse_err = |message: String| Error::Parse { path: path.to_path_buf(), message };
    let value = if text.trim_start().starts_with('{') {
        serde_json::from_str::<Value>(text).map_err(|e| parse_err(e.to_string()))?
    } else {
        let mut map = Map::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| parse_err(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim();
            let bad = || parse_err(format!("line {}: bad value for {key}", n + 1));
            let v = if LIST_KEYS.contains(&key) {
                let inner = val.trim().trim_start_matches('[').trim_end_matches(']');
                let items = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_scalar(s).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                Value::Array(items)
            } else {
                parse_scalar(val).ok_or_else(bad)?
            };
            map.insert(key.to_string(), v);
        }
        Value::Object(map)
    };
    let config: SweepConfig = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text, path)
}
