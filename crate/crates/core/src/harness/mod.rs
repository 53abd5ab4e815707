//! Facade over the structures, workload generation and replay.

pub mod blocks;
pub mod generate;
pub mod runner;
pub mod workload;

use serde::{Deserialize, Serialize};

use crate::engine::Char;
use crate::epoch::{fast_query, fast_query_deamortized};
use crate::error::{Error, Result};
use crate::kangaroo::KangarooStructure;
use crate::matcher::DichotomyParams;
use crate::oracle::NaiveStructure;
use crate::tradeoff::{tradeoff, tradeoff_deamortized};
use crate::types::DynamicKMismatch;

pub use blocks::{decompose_long_text, Block, BlockedStructure};
pub use runner::{answers, run, sweep, write_csv, CsvRow, RunReport};
pub use workload::{Record, Workload, WorkloadHeader};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Kangaroo,
    Fastq,
    Tradeoff,
    Oracle,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Kangaroo => "kangaroo",
            StructureKind::Fastq => "fastq",
            StructureKind::Tradeoff => "tradeoff",
            StructureKind::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub sigma: u32,
    pub structure: StructureKind,
    /// Subepoch length, trade-off structure only; defaults to `ceil(sqrt(k))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Replay in lockstep with the oracle.
    #[serde(default)]
    pub verify: bool,
    #[serde(default)]
    pub deamortize: bool,
}

impl InstanceConfig {
    pub fn new(n: usize, m: usize, k: usize, sigma: u32, structure: StructureKind) -> Self {
        InstanceConfig {
            n,
            m,
            k,
            sigma,
            structure,
            x: None,
            seed: 0,
            verify: false,
            deamortize: false,
        }
    }

    pub fn with_structure(mut self, structure: StructureKind) -> Self {
        self.structure = structure;
        self
    }

    pub fn with_x(mut self, x: usize) -> Self {
        self.x = Some(x);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_verify(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn with_deamortize(mut self, deamortize: bool) -> Self {
        self.deamortize = deamortize;
        self
    }

    pub fn effective_x(&self) -> usize {
        self.x.unwrap_or_else(|| (self.k as f64).sqrt().ceil() as usize).clamp(1, self.k.max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > self.n {
            return Err(Error::InvalidConfig(format!("need 1 <= m <= n, got m={}, n={}", self.m, self.n)));
        }
        if self.k == 0 || self.k > self.m {
            return Err(Error::BadK { k: self.k, m: self.m });
        }
        if self.sigma == 0 {
            return Err(Error::InvalidConfig("alphabet must be non-empty".into()));
        }
        if let Some(x) = self.x {
            if x == 0 || x > self.k {
                return Err(Error::InvalidConfig(format!("x = {x} outside [1, {}]", self.k)));
            }
        }
        Ok(())
    }
}

pub type BoxedStructure = Box<dyn DynamicKMismatch + Send>;

/// Builds the configured structure for `text` of length at most `2m`.
pub fn build_direct(config: &InstanceConfig, pattern: &[Char], text: &[Char]) -> Result<BoxedStructure> {
    let k = config.k;
    let seed = config.seed;
    let params = DichotomyParams::default();
    Ok(match config.structure {
        StructureKind::Kangaroo => Box::new(KangarooStructure::new(pattern, text, k, seed)?),
        StructureKind::Oracle => Box::new(NaiveStructure::new(pattern, text, k)),
        // k = 1 has no room for two staggered half-epochs; rebuild after every update instead.
        StructureKind::Fastq if config.deamortize && k >= 2 => Box::new(fast_query_deamortized(pattern, text, k, seed, params)?),
        StructureKind::Fastq => Box::new(fast_query(pattern, text, k, seed, k, params)?),
        StructureKind::Tradeoff if config.deamortize && k >= 2 => {
            Box::new(tradeoff_deamortized(pattern, text, k, config.effective_x(), seed)?)
        }
        StructureKind::Tradeoff => Box::new(tradeoff(pattern, text, k, config.effective_x(), seed)?),
    })
}

/// Builds the configured structure, splitting texts longer than `2m` into blocks.
pub fn build_structure(config: &InstanceConfig, pattern: &[Char], text: &[Char]) -> Result<BoxedStructure> {
    config.validate()?;
    if pattern.len() != config.m || text.len() != config.n {
        return Err(Error::InvalidConfig(format!(
            "strings have lengths ({}, {}) but the config says ({}, {})",
            pattern.len(),
            text.len(),
            config.m,
            config.n
        )));
    }
    if text.len() <= 2 * pattern.len() {
        build_direct(config, pattern, text)
    } else {
        Ok(Box::new(BlockedStructure::new(config, pattern, text)?))
    }
}
