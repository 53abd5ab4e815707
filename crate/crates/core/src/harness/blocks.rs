//! Texts longer than `2m`: overlapping blocks of length `2m` at multiples of `m`.

use crate::counters::Counters;
use crate::engine::Char;
use crate::error::{Error, Result};
use crate::harness::{build_direct, BoxedStructure, InstanceConfig};
use crate::types::{Answer, DynamicKMismatch, Target};

/// A block `[start, end)` of the text that answers alignments in `queries`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    /// Inclusive range of designated alignments.
    pub queries: (usize, usize),
}

/// Blocks `[bm, min(bm + 2m, n))` for `b < max(1, ceil(n/m) - 1)`. Block `b`
/// answers alignments in `[bm, (b+1)m)`; the last one also takes the rest.
pub fn decompose_long_text(n: usize, m: usize) -> Vec<Block> {
    assert!(m >= 1 && m <= n);
    let count = (n.div_ceil(m) - 1).max(1);
    (0..count)
        .map(|b| {
            let start = b * m;
            let last = b + 1 == count;
            Block {
                start,
                end: if last { n } else { (start + 2 * m).min(n) },
                queries: (start, if last { n - m } else { start + m - 1 }),
            }
        })
        .collect()
}

/// One direct structure per block.
pub struct BlockedStructure {
    blocks: Vec<Block>,
    parts: Vec<BoxedStructure>,
    m: usize,
    n: usize,
    k: usize,
}

impl BlockedStructure {
    pub fn new(config: &InstanceConfig, pattern: &[Char], text: &[Char]) -> Result<Self> {
        let (m, n) = (pattern.len(), text.len());
        let blocks = decompose_long_text(n, m);
        let parts = blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                let mut c = *config;
                c.n = blk.end - blk.start;
                c.seed = config.seed.wrapping_add(b as u64);
                build_direct(&c, pattern, &text[blk.start..blk.end])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockedStructure {
            blocks,
            parts,
            m,
            n,
            k: config.k,
        })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_for(&self, i: usize) -> usize {
        (i / self.m).min(self.blocks.len() - 1)
    }
}

impl DynamicKMismatch for BlockedStructure {
    fn pattern_len(&self) -> usize {
        self.m
    }

    fn text_len(&self) -> usize {
        self.n
    }

    fn threshold(&self) -> usize {
        self.k
    }

    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()> {
        match target {
            Target::Pattern => {
                if index >= self.m {
                    return Err(Error::IndexOutOfRange { index, len: self.m });
                }
                for part in &mut self.parts {
                    part.update(target, index, c)?;
                }
            }
            Target::Text => {
                if index >= self.n {
                    return Err(Error::IndexOutOfRange { index, len: self.n });
                }
                for (blk, part) in self.blocks.iter().zip(&mut self.parts) {
                    if blk.start <= index && index < blk.end {
                        part.update(target, index - blk.start, c)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn query(&mut self, i: usize) -> Result<Answer> {
        if i + self.m > self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n - self.m + 1,
            });
        }
        let b = self.block_for(i);
        let start = self.blocks[b].start;
        self.parts[b].query(i - start)
    }

    fn counters(&self) -> Counters {
        self.parts.iter().map(|p| p.counters()).fold(Counters::default(), |a, b| a + b)
    }
}
