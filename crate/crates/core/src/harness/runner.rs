//! Replaying workloads and reporting counters.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::counters::Counters;
use crate::error::{Error, Result};
use crate::harness::{build_structure, InstanceConfig, Record, StructureKind, Workload};
use crate::oracle::NaiveStructure;
use crate::types::{Answer, DynamicKMismatch};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub config: InstanceConfig,
    /// One answer per query record, in order.
    pub answers: Vec<Answer>,
    /// Counter increments of each operation, in order.
    pub per_op: Vec<Counters>,
    pub totals: Counters,
    /// Operation with the largest total counter increment (first on ties).
    pub op_index_max: usize,
    pub wall_ms: u128,
}

impl RunReport {
    /// Largest increment of one counter over the update (or query) operations.
    pub fn max_over(&self, workload: &Workload, updates: bool, field: impl Fn(&Counters) -> u64) -> u64 {
        self.per_op
            .iter()
            .zip(&workload.records)
            .filter(|(_, r)| matches!(r, Record::Update { .. }) == updates)
            .map(|(c, _)| field(c))
            .max()
            .unwrap_or(0)
    }

    /// Sum of one counter over the update (or query) operations.
    pub fn sum_over(&self, workload: &Workload, updates: bool, field: impl Fn(&Counters) -> u64) -> u64 {
        self.per_op
            .iter()
            .zip(&workload.records)
            .filter(|(_, r)| matches!(r, Record::Update { .. }) == updates)
            .map(|(c, _)| field(c))
            .sum()
    }

    pub fn csv_row(&self) -> CsvRow {
        CsvRow::new(&self.config, self.op_index_max, &self.totals, self.wall_ms)
    }
}

/// Replays `workload` on the structure described by `config` (the header's
/// strings are used). With `config.verify` every query is checked against the
/// oracle and the first disagreement is returned as
/// [`Error::DivergenceDetected`]; expected answers stored in the workload are
/// always checked.
pub fn run(workload: &Workload, config: &InstanceConfig) -> Result<RunReport> {
    let structure = build_structure(config, &workload.header.pattern, &workload.header.text)?;
    run_on(workload, config, structure)
}

/// [`run`] on an already built structure.
pub fn run_on(workload: &Workload, config: &InstanceConfig, mut structure: Box<dyn DynamicKMismatch + Send>) -> Result<RunReport> {
    let h = &workload.header;
    let mut reference = config.verify.then(|| NaiveStructure::new(&h.pattern, &h.text, config.k));
    let started = Instant::now();
    let mut answers = Vec::with_capacity(workload.queries());
    let mut per_op = Vec::with_capacity(workload.records.len());
    let mut before = structure.counters();
    for (op_index, record) in workload.records.iter().enumerate() {
        match *record {
            Record::Update { target, index, char } => {
                structure.update(target, index, char)?;
                if let Some(r) = reference.as_mut() {
                    r.update(target, index, char)?;
                }
            }
            Record::Query { index, expected } => {
                let got = structure.query(index)?;
                let expected = match reference.as_mut() {
                    Some(r) => Some(r.query(index)?),
                    None => expected,
                };
                if let Some(expected) = expected {
                    if got != expected {
                        return Err(Error::DivergenceDetected { op_index, got, expected });
                    }
                }
                answers.push(got);
            }
        }
        let now = structure.counters();
        per_op.push(now - before);
        before = now;
    }
    let wall_ms = started.elapsed().as_millis();
    let op_index_max = per_op
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.values().iter().sum::<u64>().cmp(&b.values().iter().sum::<u64>()).then(j.cmp(i)))
        .map_or(0, |(i, _)| i);
    Ok(RunReport {
        config: *config,
        answers,
        totals: structure.counters(),
        per_op,
        op_index_max,
        wall_ms,
    })
}

/// Answers of the oracle on `workload`.
pub fn answers(workload: &Workload) -> Result<Vec<Answer>> {
    let config = workload.header.config.with_structure(StructureKind::Oracle).with_verify(false);
    Ok(run(workload, &config)?.answers)
}

/// Runs `workload` once per subepoch length.
pub fn sweep(workload: &Workload, config: &InstanceConfig, xs: &[usize]) -> Result<Vec<RunReport>> {
    xs.iter().map(|&x| run(workload, &config.with_x(x))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CsvRow {
    pub structure: &'static str,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub x: usize,
    pub op_index_max: usize,
    pub lcp_calls: u64,
    pub char_comparisons: u64,
    pub set_ops: u64,
    pub conv_point_mults: u64,
    pub prefix_accesses: u64,
    pub rebuild_steps: u64,
    pub heavy_letters: u64,
    pub buffer_scans: u64,
    pub wall_ms: u128,
}

impl CsvRow {
    pub fn new(config: &InstanceConfig, op_index_max: usize, c: &Counters, wall_ms: u128) -> Self {
        CsvRow {
            structure: config.structure.name(),
            n: config.n,
            m: config.m,
            k: config.k,
            x: if config.structure == StructureKind::Tradeoff { config.effective_x() } else { 0 },
            op_index_max,
            lcp_calls: c.lcp_calls,
            char_comparisons: c.char_comparisons,
            set_ops: c.set_ops,
            conv_point_mults: c.conv_point_mults,
            prefix_accesses: c.prefix_accesses,
            rebuild_steps: c.rebuild_steps,
            heavy_letters: c.heavy_letters,
            buffer_scans: c.buffer_scans,
            wall_ms,
        }
    }
}

pub fn write_csv(rows: &[CsvRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
