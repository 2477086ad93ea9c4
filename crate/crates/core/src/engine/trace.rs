//! Trace records and their line-delimited JSON form.
//!
//! A trace file holds one JSON object per line, each tagged by `type`:
//! a `header` (carrying `schema`), one `seed` line per rumor seeding, one
//! `step` line per iteration, and a closing `summary`. A run that fails ends
//! with an `error` line instead of a summary.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ActivationStrategy, BeliefMatrix, EngineError, InitStrategy};
use crate::prompt::Warning;

pub const TRACE_SCHEMA: &str = "rumorsim-trace/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub master_seed: u64,
    pub iterations: u64,
    pub node_count: usize,
    pub edge_count: usize,
    pub rumors: Vec<String>,
    pub belief_threshold: f64,
    pub init_strategy: InitStrategy,
    pub activation_strategy: ActivationStrategy,
    /// Persona name bound to each node.
    pub agent_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub rumor: usize,
    pub agents: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Applied,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefDelta {
    pub rumor: usize,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: u64,
    pub agent: usize,
    pub prompt_hash: String,
    pub outcome: StepOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub belief_deltas: Vec<BeliefDelta>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
    /// Codes of parse failures met during this step, including retried ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub steps: u64,
    pub skipped: u64,
    pub final_beliefs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceLine {
    Header(TraceHeader),
    Seed(SeedRecord),
    Step(StepRecord),
    Summary(TraceSummary),
    Error { iteration: u64, message: String },
}

/// A complete run: header, seeding, every step and the final matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub header: TraceHeader,
    pub seeds: Vec<SeedRecord>,
    pub steps: Vec<StepRecord>,
    pub summary: TraceSummary,
}

impl SimulationTrace {
    pub fn final_beliefs(&self) -> BeliefMatrix {
        BeliefMatrix::from_rows(&self.summary.final_beliefs)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = Vec::new();
        let mut w = TraceWriter::new(&mut out);
        w.write(&TraceLine::Header(self.header.clone())).expect("in-memory write");
        for s in &self.seeds {
            w.write(&TraceLine::Seed(s.clone())).expect("in-memory write");
        }
        for s in &self.steps {
            w.write(&TraceLine::Step(s.clone())).expect("in-memory write");
        }
        w.write(&TraceLine::Summary(self.summary.clone())).expect("in-memory write");
        String::from_utf8(out).expect("serde_json writes UTF-8")
    }

    /// Belief matrix rebuilt from the recorded checks alone.
    pub fn replay_beliefs(&self) -> BeliefMatrix {
        let mut b = BeliefMatrix::zeros(self.header.node_count, self.header.rumors.len());
        for step in &self.steps {
            if let (StepOutcome::Applied, Some(checks)) = (step.outcome, &step.checks) {
                b.set_row_from_checks(step.agent, checks);
            }
        }
        b
    }
}

/// Writes trace lines and flushes after each one.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, line: &TraceLine) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, line)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<SimulationTrace, EngineError> {
    let mut header = None;
    let mut seeds = Vec::new();
    let mut steps = Vec::new();
    let mut summary = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine =
            serde_json::from_str(&line).map_err(|e| EngineError::Trace(format!("line {}: {e}", i + 1)))?;
        match parsed {
            TraceLine::Header(h) => {
                if h.schema != TRACE_SCHEMA {
                    return Err(EngineError::Trace(format!("unsupported schema {:?}", h.schema)));
                }
                header = Some(h);
            }
            TraceLine::Seed(s) => seeds.push(s),
            TraceLine::Step(s) => steps.push(s),
            TraceLine::Summary(s) => summary = Some(s),
            TraceLine::Error { iteration, message } => {
                return Err(EngineError::Trace(format!("run failed at iteration {iteration}: {message}")))
            }
        }
    }
    let header = header.ok_or_else(|| EngineError::Trace("missing header line".into()))?;
    let summary = summary.ok_or_else(|| EngineError::Trace("missing summary line (incomplete run?)".into()))?;
    Ok(SimulationTrace { header, seeds, steps, summary })
}
