//! Command-line driver for `hwforest-core`: curve parsing, CSV/JSONL output,
//! thread-parallel row jobs and the `compute`, `verify`, `bench`, `selftest`
//! and `transition` modes.

pub mod cli;
pub mod output;
pub mod pipeline;
pub mod selftest;

pub use cli::{run, ExitStatus, Mode, RunConfig};
pub use output::{OutputFormat, RecordWriter};
pub use pipeline::{run_pipeline, threads_from_env, PipelineError, PipelineSummary};
