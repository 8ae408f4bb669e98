//! Record serialization.
//!
//! CSV rows are `p,w11,...,wgg,trace[,a_p]` with residues in `[0, p)`; the
//! `a_p` column is present only for genus 1; below 17 it comes from a direct
//! point count rather than the trace lift. There is no header row. JSONL
//! lines mirror [`HasseWittRecord`].

use std::io::{self, Write};

use clap::ValueEnum;
use hwforest_core::HasseWittRecord;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    p: u64,
    genus: usize,
    w: Vec<&'a [u64]>,
    trace: u64,
    charpoly: &'a [u64],
    a_p: Option<i64>,
    source: &'static str,
}

pub fn csv_line(rec: &HasseWittRecord) -> String {
    let mut fields: Vec<String> = Vec::with_capacity(rec.w.len() + 3);
    fields.push(rec.p.to_string());
    fields.extend(rec.w.iter().map(u64::to_string));
    fields.push(rec.trace.to_string());
    if rec.genus == 1 {
        fields.push(rec.a_p.map(|a| a.to_string()).unwrap_or_default());
    }
    fields.join(",")
}

pub fn json_line(rec: &HasseWittRecord) -> String {
    let json = JsonRecord {
        p: rec.p,
        genus: rec.genus,
        w: rec.w.chunks(rec.genus).collect(),
        trace: rec.trace,
        charpoly: &rec.charpoly,
        a_p: rec.a_p,
        source: rec.source.as_str(),
    };
    serde_json::to_string(&json).expect("plain data serializes")
}

/// Writes records in one format and flushes after every batch, so partial
/// results survive an interrupted run.
pub struct RecordWriter<W: Write> {
    out: W,
    format: OutputFormat,
    written: usize,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W, format: OutputFormat) -> Self {
        RecordWriter {
            out,
            format,
            written: 0,
        }
    }

    pub fn write_batch(&mut self, records: &[HasseWittRecord]) -> io::Result<()> {
        if records.is_empty() {
            return Ok(());
        }
        for rec in records {
            let line = match self.format {
                OutputFormat::Csv => csv_line(rec),
                OutputFormat::Jsonl => json_line(rec),
            };
            writeln!(self.out, "{line}")?;
        }
        self.written += records.len();
        self.out.flush()
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
