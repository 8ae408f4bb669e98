//! Thread-parallel driver. Row jobs run on worker threads and send their
//! rows over a channel; the calling thread merges them by `p` and hands
//! complete records to the sink in ascending order, so the output does not
//! depend on scheduling.

use std::fmt;
use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use hwforest_core::curve::admissible_primes;
use hwforest_core::hassewitt::{
    compute_hassewitt_rows, row_jobs, PrecisionFailure, RecordMerger, RowResult,
};
use hwforest_core::{CurveModel, Error, HasseWittOptions, HasseWittRecord, MemoryMeter, Multiplier};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "HWFOREST_THREADS";

#[derive(Debug)]
pub enum PipelineError {
    Math(Error),
    Io(io::Error),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Math(e) => write!(f, "{e}"),
            PipelineError::Io(e) => write!(f, "write failed: {e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<Error> for PipelineError {
    fn from(e: Error) -> Self {
        PipelineError::Math(e)
    }
}

impl From<io::Error> for PipelineError {
    fn from(e: io::Error) -> Self {
        PipelineError::Io(e)
    }
}

#[derive(Clone, Debug, Default)]
pub struct PipelineSummary {
    pub records: usize,
    pub admissible: usize,
    pub skipped: usize,
    /// Rows that failed to assemble and were recomputed directly.
    pub failures: Vec<PrecisionFailure>,
    /// Largest metered peak of a single row job.
    pub peak_bytes: u64,
}

/// Thread count from [`THREADS_ENV`], else the available parallelism.
/// `Err` carries the offending value.
pub fn threads_from_env() -> Result<usize, String> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(s),
        },
        Err(_) => Ok(thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

enum Message {
    Rows(usize, Vec<RowResult>),
    Done(u64),
    Failed(Error),
}

/// Computes every record for `p <= bound` and passes them to `sink` in
/// ascending `p`, batch by batch as rows complete.
pub fn run_pipeline(
    mul: &Multiplier,
    curve: &CurveModel,
    bound: u64,
    options: &HasseWittOptions,
    threads: usize,
    sink: &mut dyn FnMut(&[HasseWittRecord]) -> io::Result<()>,
) -> Result<PipelineSummary, PipelineError> {
    let primes = admissible_primes(curve, bound);
    let jobs = row_jobs(curve, &primes, options).map_err(Error::from)?;
    let forest = jobs.first().map(|j| j.primes.clone()).unwrap_or_default();
    let mut merger = RecordMerger::new(curve, &primes.primes, &forest);
    let mut summary = PipelineSummary {
        admissible: primes.primes.len(),
        skipped: primes.skipped.len(),
        ..PipelineSummary::default()
    };

    let workers = threads.clamp(1, jobs.len().max(1));
    let next_job = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<Message>();

    let outcome = thread::scope(|scope| -> Result<(), PipelineError> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (jobs, next_job) = (&jobs, &next_job);
            scope.spawn(move || loop {
                let idx = next_job.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(idx) else { break };
                let mut meter = MemoryMeter::new();
                let result = compute_hassewitt_rows(mul, job, &mut meter, &mut |batch| {
                    let _ = tx.send(Message::Rows(job.i, batch));
                });
                let msg = match result {
                    Ok(()) => Message::Done(meter.peak()),
                    Err(e) => Message::Failed(e),
                };
                if tx.send(msg).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let ready = merger.drain();
        summary.records += ready.len();
        sink(&ready)?;
        let mut first_error = None;
        for msg in rx {
            match msg {
                Message::Rows(i, batch) => {
                    for row in batch {
                        merger.add(i, row);
                    }
                    let ready = merger.drain();
                    summary.records += ready.len();
                    if let Err(e) = sink(&ready) {
                        // Workers stop at their next send once `rx` is gone.
                        return Err(e.into());
                    }
                }
                Message::Done(peak) => summary.peak_bytes = summary.peak_bytes.max(peak),
                Message::Failed(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        match first_error {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    });
    outcome?;

    // Covers the no-job and all-naive cases.
    let rest = merger.drain();
    summary.records += rest.len();
    sink(&rest)?;
    debug_assert!(merger.is_done());
    summary.failures = merger.failures().to_vec();
    Ok(summary)
}
