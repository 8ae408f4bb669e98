//! Argument parsing and the five modes.
//!
//! Coefficients are given ascending, `f0,f1,...,fd`, as one comma-separated
//! list: `--curve 1,1,0,1` is `y^2 = x^3 + x + 1`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use hwforest_core::curve::{admissible_primes, validate_curve};
use hwforest_core::hassewitt::{compute_hassewitt_matrices, naive_hassewitt, row_jobs};
use hwforest_core::transition::derive_with;
use hwforest_core::{CurveModel, HasseWittOptions, HasseWittRecord, Multiplier};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{OutputFormat, RecordWriter};
use crate::pipeline::{run_pipeline, threads_from_env, PipelineError, THREADS_ENV};
use crate::selftest;

/// `2x^7 + 3x^6 + 5x^5 + 7x^4 + 11x^3 + 13x^2 + 17x + 19`.
pub const DEFAULT_CURVE: &str = "19,17,13,11,7,5,3,2";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    Usage,
    /// A verify mismatch or failed self-check.
    Math,
    Io,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::Usage => 1,
            ExitStatus::Math => 2,
            ExitStatus::Io => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Compute,
    Verify,
    Bench,
    Selftest,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub coeffs: Vec<BigInt>,
    pub n: u64,
    pub k: Option<u32>,
    pub k_adjust: i32,
    pub mode: Mode,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub naive_cutoff: u64,
    pub safe_mode: bool,
    pub verify_fraction: f64,
    pub seed: u64,
    pub threads: usize,
}

impl RunConfig {
    pub fn options(&self) -> HasseWittOptions {
        HasseWittOptions {
            k: self.k,
            k_adjust: self.k_adjust,
            naive_cutoff: self.naive_cutoff,
            safe_mode: self.safe_mode,
            force_naive: false,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "hwforest",
    version,
    about = "Hasse-Witt matrices of y^2 = f(x) modulo every admissible prime up to N",
    after_help = "Coefficients are ascending: --curve 1,1,0,1 means y^2 = x^3 + x + 1.\n\
                  The worker thread count is read from HWFOREST_THREADS."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one record per admissible prime p <= N.
    Compute(RunArgs),
    /// Compute, then recheck a seeded sample of primes by direct expansion.
    Verify(RunArgs),
    /// Sweep the subtree exponent k and report time and peak memory.
    Bench(RunArgs),
    /// Run a fixed set of internal consistency checks.
    Selftest,
    /// Print the transition matrix M(n) and denominator D(n) for one row.
    Transition(TransitionArgs),
}

#[derive(Clone, Debug)]
struct Coeffs(Vec<BigInt>);

fn parse_coeffs(s: &str) -> Result<Coeffs, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| format!("'{}' is not an integer", t.trim()))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Coeffs)
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1]"))
    }
}

#[derive(Args, Debug)]
struct CurveArgs {
    /// Ascending coefficients f0,...,fd of f.
    #[arg(long, default_value = DEFAULT_CURVE, value_parser = parse_coeffs, allow_hyphen_values = true)]
    curve: Coeffs,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// Bound on the primes.
    #[arg(long = "N", value_name = "N")]
    n: u64,
    /// Subtree exponent; the forest has 2^k subtrees. Default from the leaf count.
    #[arg(long)]
    k: Option<u32>,
    /// Added to the default k.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    k_adjust: i32,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file (default stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Primes below this are expanded directly.
    #[arg(long, default_value_t = hwforest_core::hassewitt::DEFAULT_NAIVE_CUTOFF)]
    naive_cutoff: u64,
    /// Work modulo p^(d+1) with no exact tail.
    #[arg(long)]
    safe_mode: bool,
    /// Share of primes rechecked in verify mode.
    #[arg(long, default_value_t = 0.1, value_parser = parse_fraction)]
    verify_fraction: f64,
    /// Seed for the verify sample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct TransitionArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// Row index, 1..=g.
    #[arg(long, default_value_t = 1)]
    row: usize,
    #[arg(long)]
    safe_mode: bool,
}

/// Parses `args` (program name first), runs, and reports diagnostics on
/// stderr.
pub fn main_with_args<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitStatus::Ok,
                _ => ExitStatus::Usage,
            };
        }
    };
    let threads = match threads_from_env() {
        Ok(n) => n,
        Err(bad) => {
            eprintln!("error: {THREADS_ENV}='{bad}' is not a positive integer");
            return ExitStatus::Usage;
        }
    };
    let (mode, args) = match cli.command {
        Command::Compute(a) => (Mode::Compute, a),
        Command::Verify(a) => (Mode::Verify, a),
        Command::Bench(a) => (Mode::Bench, a),
        Command::Selftest => return run_selftest(),
        Command::Transition(a) => return run_transition(&a),
    };
    let config = RunConfig {
        coeffs: args.curve.curve.0,
        n: args.n,
        k: args.k,
        k_adjust: args.k_adjust,
        mode,
        format: args.format,
        output: args.output,
        naive_cutoff: args.naive_cutoff,
        safe_mode: args.safe_mode,
        verify_fraction: args.verify_fraction,
        seed: args.seed,
        threads,
    };
    run(&config)
}

pub fn run(config: &RunConfig) -> ExitStatus {
    if config.mode == Mode::Selftest {
        return run_selftest();
    }
    let curve = match validate_curve(&config.coeffs) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid curve: {e}");
            return ExitStatus::Usage;
        }
    };
    if !(0.0..=1.0).contains(&config.verify_fraction) {
        eprintln!("error: verify fraction must lie in [0, 1]");
        return ExitStatus::Usage;
    }
    let out: Box<dyn Write> = match &config.output {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot open {}: {e}", path.display());
                return ExitStatus::Io;
            }
        },
        None if config.mode == Mode::Verify => Box::new(io::sink()),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    match config.mode {
        Mode::Compute => compute(config, &curve, out),
        Mode::Verify => verify(config, &curve, out),
        Mode::Bench => bench(config, &curve, out),
        Mode::Selftest => unreachable!(),
    }
}

fn report_pipeline_error(e: PipelineError) -> ExitStatus {
    eprintln!("error: {e}");
    match e {
        PipelineError::Io(_) => ExitStatus::Io,
        PipelineError::Math(_) => ExitStatus::Math,
    }
}

fn compute(config: &RunConfig, curve: &CurveModel, out: Box<dyn Write>) -> ExitStatus {
    let mul = Multiplier::new();
    let mut writer = RecordWriter::new(out, config.format);
    let result = run_pipeline(&mul, curve, config.n, &config.options(), config.threads, &mut |recs| {
        writer.write_batch(recs)
    });
    match result {
        Ok(summary) => {
            eprintln!(
                "{} records ({} primes skipped), {} rows recomputed directly",
                summary.records,
                summary.skipped,
                summary.failures.len()
            );
            ExitStatus::Ok
        }
        Err(e) => report_pipeline_error(e),
    }
}

fn verify(config: &RunConfig, curve: &CurveModel, out: Box<dyn Write>) -> ExitStatus {
    let mul = Multiplier::new();
    let mut writer = RecordWriter::new(out, config.format);
    let mut records: Vec<HasseWittRecord> = Vec::new();
    let result = run_pipeline(&mul, curve, config.n, &config.options(), config.threads, &mut |recs| {
        records.extend_from_slice(recs);
        writer.write_batch(recs)
    });
    if let Err(e) = result {
        return report_pipeline_error(e);
    }
    let expected = admissible_primes(curve, config.n).primes;
    let got: Vec<u64> = records.iter().map(|r| r.p).collect();
    let mut mismatches = 0usize;
    if got != expected {
        eprintln!("mismatch: records cover a different prime set than the admissible primes");
        mismatches += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checked = 0usize;
    for rec in &records {
        if !rng.gen_bool(config.verify_fraction) {
            continue;
        }
        checked += 1;
        let direct = naive_hassewitt(curve, rec.p);
        if direct != rec.w {
            mismatches += 1;
            eprintln!(
                "mismatch at p={} ({}): got {:?}, direct expansion {:?}",
                rec.p,
                rec.source.as_str(),
                rec.w,
                direct
            );
        }
    }
    println!(
        "verified {checked} of {} primes (fraction {}, seed {}): {mismatches} mismatches",
        records.len(),
        config.verify_fraction,
        config.seed
    );
    if mismatches == 0 {
        ExitStatus::Ok
    } else {
        ExitStatus::Math
    }
}

fn bench(config: &RunConfig, curve: &CurveModel, mut out: Box<dyn Write>) -> ExitStatus {
    let mul = Multiplier::new();
    let options = config.options();
    let primes = admissible_primes(curve, config.n);
    let ell = match row_jobs(curve, &primes, &options) {
        Ok(jobs) => jobs.first().map_or(0, |j| j.plan.ell),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::Math;
        }
    };
    let ks: Vec<u32> = match config.k {
        Some(k) => vec![k],
        None => (0..=ell).collect(),
    };
    let mut peaks = Vec::with_capacity(ks.len());
    let write = |out: &mut Box<dyn Write>, line: String| writeln!(out, "{line}").and_then(|_| out.flush());
    if let Err(e) = write(&mut out, "k,seconds,peak_bytes,records".to_string()) {
        return report_pipeline_error(PipelineError::Io(e));
    }
    for k in ks {
        let opts = HasseWittOptions {
            k: Some(k),
            ..options
        };
        let start = Instant::now();
        let report = match compute_hassewitt_matrices(&mul, curve, config.n, &opts) {
            Ok(r) => r,
            Err(e) => return report_pipeline_error(PipelineError::Math(e)),
        };
        let secs = start.elapsed().as_secs_f64();
        peaks.push(report.peak_bytes);
        let line = format!("{k},{secs:.6},{},{}", report.peak_bytes, report.records.len());
        if let Err(e) = write(&mut out, line) {
            return report_pipeline_error(PipelineError::Io(e));
        }
    }
    let monotone = peaks.windows(2).all(|w| w[1] <= w[0]);
    eprintln!(
        "peak memory {} in k",
        if monotone { "non-increasing" } else { "NOT monotone" }
    );
    ExitStatus::Ok
}

fn run_selftest() -> ExitStatus {
    let mut failed = 0;
    for (name, result) in selftest::run_all() {
        match result {
            Ok(()) => println!("ok   {name}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitStatus::Ok
    } else {
        ExitStatus::Math
    }
}

fn run_transition(args: &TransitionArgs) -> ExitStatus {
    let curve = match validate_curve(&args.curve.curve.0) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid curve: {e}");
            return ExitStatus::Usage;
        }
    };
    match derive_with(&curve, args.row, args.safe_mode) {
        Ok(ts) => {
            print!("{}", ts.to_text());
            println!("e = {}\nw = {}", ts.e, ts.w);
            ExitStatus::Ok
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::Usage
        }
    }
}
