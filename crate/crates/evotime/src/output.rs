//! CSV and JSON writers.

use std::io::Write;

use anyhow::Result;
use evotime_core::engine::EventRecord;
use serde::Serialize;

#[derive(Debug, Serialize)]
struct EventRow<'a> {
    time: f64,
    worker: Option<usize>,
    event: &'a str,
    task: &'a str,
    generation: u64,
    evaluations: u64,
    best_fitness: Option<f64>,
    queued: usize,
    idle_workers: usize,
}

/// Writes one CSV record per simulator event.
pub fn write_events<W: Write>(out: W, events: &[EventRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in events {
        w.serialize(EventRow {
            time: e.time,
            worker: e.worker,
            event: e.kind.as_str(),
            task: e.task,
            generation: e.generation,
            evaluations: e.evaluations,
            best_fitness: e.best_fitness.is_finite().then_some(e.best_fitness),
            queued: e.queued,
            idle_workers: e.idle_workers,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One result line: a single run, or the outcome of a search for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub problem: String,
    pub ratio: String,
    pub seed: u64,
    /// Population size, or `FAILED` when a search found no solving size.
    pub pop_size: String,
    pub success: bool,
    pub simulated_time: Option<f64>,
    pub evaluations: u64,
}

pub const FAILED: &str = "FAILED";

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
