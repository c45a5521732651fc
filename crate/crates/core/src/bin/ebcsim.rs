use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ebcsim::output::{self, fmt_sig};
use ebcsim::signal_model::eval_trace;
use ebcsim::sod::{encode_trace, SodConfig};
use ebcsim::sweep::{realization, run_sweep_with, SweepConfig};
use ebcsim::wsk::{filtered_samples, quantize_samples, WskConfig};
use ebcsim::{Error, Result, GRID_RATE, S_MAX, W_MAX};

#[derive(Parser)]
#[command(name = "ebcsim", version, about = "Event-based vs. uniform-sampling link efficiency simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo sweep and write all tables
    Sweep(SweepArgs),
    /// Dump one realization: dense trace, SOD events and WSK symbols
    Signal(SignalArgs),
    /// Rebuild the comparison tables from a saved sweep
    Report(ReportArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Configuration file (JSON or key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Realizations per bandwidth profile
    #[arg(long)]
    realizations: Option<usize>,
    /// Restrict to these mean bandwidths (repeatable or comma-separated)
    #[arg(long = "w-mean", value_delimiter = ',')]
    w_mean: Vec<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; defaults to all cores
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SignalArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "w-mean", default_value_t = 475.0)]
    w_mean: f64,
    /// Realization index within the profile
    #[arg(long, default_value_t = 0)]
    realization: usize,
    /// Send-on-delta levels
    #[arg(long, default_value_t = 20)]
    n_levels: usize,
    /// WSK oversampling factor
    #[arg(long, default_value_t = 1.0)]
    n_os: f64,
    #[arg(long, default_value_t = 8)]
    n_bits: u32,
    #[arg(long, default_value = "signal")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of a finished sweep
    #[arg(long, default_value = "out")]
    from: PathBuf,
    /// Where to write the tables; defaults to the sweep directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => output::load_config(p)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(m) = args.realizations {
        config.m_realizations = m;
    }
    if !args.w_mean.is_empty() {
        config.w_mean_list = args.w_mean.clone();
    }
    eprintln!(
        "sweep: seed {}, {} realizations x {} profiles",
        config.master_seed,
        config.m_realizations,
        config.w_mean_list.len()
    );
    let result = run_sweep_with(&config, args.threads)?;
    let (rows, written) = output::emit_outputs(&result, &args.out_dir)?;
    for p in &written.paths {
        println!("{}", p.display());
    }
    let missing = rows.iter().filter(|r| !r.attainable()).count();
    eprintln!("{} comparison rows, {} unattainable", rows.len(), missing);
    Ok(())
}

fn signal(args: SignalArgs) -> Result<()> {
    let (signal, dense) = realization(args.seed, args.w_mean, args.realization)?;
    fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io { path: args.out_dir.clone(), source })?;

    let trace = eval_trace(&signal, GRID_RATE);
    let mut text = String::from("t,value\n");
    for (i, v) in trace.values.iter().enumerate() {
        text.push_str(&format!("{},{}\n", fmt_sig(trace.time_at(i)), fmt_sig(*v)));
    }
    let trace_path = args.out_dir.join("trace.csv");
    write_file(&trace_path, &text)?;

    let sod = SodConfig::new(args.n_levels, S_MAX)?;
    let events = encode_trace(&signal, &dense, &sod);
    let events_path = args.out_dir.join("events.txt");
    write_file(&events_path, &events.to_text())?;

    let wsk = WskConfig::from_oversampling(args.n_os, args.n_bits, W_MAX);
    let symbols = quantize_samples(&filtered_samples(&signal, wsk.f_s)?, &wsk);
    let symbols_path = args.out_dir.join("symbols.txt");
    write_file(&symbols_path, &(symbols.to_csv_line() + "\n"))?;

    let seed = signal.seed().expect("synthesized signals carry a seed");
    eprintln!(
        "W = {} Hz, realization {}, {} amplitudes, accepted draw {}, {} events, {} symbols at {} Hz",
        args.w_mean,
        args.realization,
        signal.amplitudes().len(),
        seed.attempt,
        events.len(),
        symbols.indices.len(),
        wsk.f_s,
    );
    for p in [trace_path, events_path, symbols_path] {
        println!("{}", p.display());
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let (_, _, rows) = output::load_comparison(&args.from)?;
    let dir = args.out_dir.unwrap_or(args.from);
    let mut written = output::Written::default();
    output::write_comparison_tables(&dir, &rows, &mut written)?;
    for p in &written.paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Signal(a) => signal(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
