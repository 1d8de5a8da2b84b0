//! JSON-lines slot logs.
//!
//! The first line identifies the run (scenario and repetition); every
//! following line is one slot in channel order.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use selbb_core::sim::SlotRecord;
use serde::{Deserialize, Serialize};

use crate::metrics::{run_prepared, RunError, RunResult};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub scenario: Scenario,
    pub repetition: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub round: u32,
    pub slot: u32,
    pub sender: u16,
    pub kind: String,
    pub bytes: usize,
    pub bits: usize,
    pub phase: String,
}

impl From<&SlotRecord> for TraceLine {
    fn from(r: &SlotRecord) -> Self {
        TraceLine {
            round: r.round,
            slot: r.slot,
            sender: r.sender.get(),
            kind: r.kind.as_str().to_string(),
            bytes: r.bytes,
            bits: r.bits,
            phase: r.phase.tag().to_string(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("empty trace file")]
    Empty,
    #[error(transparent)]
    Run(#[from] RunError),
}

pub fn trace_file_name(scenario: &Scenario, repetition: usize, seed: u64) -> String {
    format!("{}_rep{repetition}_seed{seed}.jsonl", scenario.label())
}

/// The lines of a trace file, without trailing newlines.
pub fn render(scenario: &Scenario, run: &RunResult) -> Vec<String> {
    let header = TraceHeader {
        scenario: scenario.clone(),
        repetition: run.prepared.repetition,
        seed: run.prepared.seed,
    };
    let mut lines = vec![serde_json::to_string(&header).expect("serializable")];
    lines.extend(
        run.outcome
            .trace
            .iter()
            .map(|r| serde_json::to_string(&TraceLine::from(r)).expect("serializable")),
    );
    lines
}

/// Writes `dir/<label>_rep<r>_seed<s>.jsonl` and returns its path.
pub fn write_trace(dir: &Path, scenario: &Scenario, run: &RunResult) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(trace_file_name(scenario, run.prepared.repetition, run.prepared.seed));
    let mut f = io::BufWriter::new(fs::File::create(&path)?);
    for line in render(scenario, run) {
        writeln!(f, "{line}")?;
    }
    f.flush()?;
    Ok(path)
}

#[derive(Debug)]
pub struct ReplayReport {
    pub run: RunResult,
    /// 1-based line of the first difference, if any.
    pub first_difference: Option<usize>,
    pub recorded_lines: usize,
    pub replayed_lines: usize,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.first_difference.is_none()
    }
}

/// Re-runs the repetition named in a trace's header and compares slot logs.
pub fn replay(path: &Path) -> Result<ReplayReport, TraceError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let recorded: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
    let first = recorded.first().ok_or(TraceError::Empty)?;
    let header: TraceHeader =
        serde_json::from_str(first).map_err(|source| TraceError::Json { line: 1, source })?;
    let prepared = header
        .scenario
        .prepare(header.repetition)
        .map_err(RunError::from)?;
    let run = run_prepared(&header.scenario, &prepared)?;
    let replayed = render(&header.scenario, &run);
    let first_difference = recorded
        .iter()
        .zip(&replayed)
        .position(|(a, b)| a != b)
        .or_else(|| (recorded.len() != replayed.len()).then(|| recorded.len().min(replayed.len())))
        .map(|i| i + 1);
    Ok(ReplayReport {
        run,
        first_difference,
        recorded_lines: recorded.len(),
        replayed_lines: replayed.len(),
    })
}
