//! Fast updates, `O(k)` LCP calls per query.
//!
//! Updates are plain substitutions in the string engine. A query aligns the
//! pattern with the text window and jumps from mismatch to mismatch with LCP,
//! stopping after `k + 1` mismatches.

use crate::counters::Counters;
use crate::engine::{Char, DynStringId, Fragment, StringEngine};
use crate::error::{Error, Result};
use crate::types::{Answer, DynamicKMismatch, Target};

/// Hamming distance of two equal-length fragments if it is at most `cap`.
/// Mismatches are enumerated left to right. Also returns the LCP calls used,
/// which never exceed `cap + 1`.
pub fn mismatches_capped(engine: &StringEngine, a: Fragment, b: Fragment, cap: usize) -> (Option<usize>, u64) {
    debug_assert_eq!(a.len(), b.len());
    let len = a.len();
    let mut pos = 0;
    let mut mismatches = 0;
    let mut calls = 0;
    while pos < len {
        calls += 1;
        pos += engine.lcp(a.suffix(pos), b.suffix(pos));
        if pos == len {
            break;
        }
        mismatches += 1;
        if mismatches > cap {
            return (None, calls);
        }
        pos += 1;
    }
    (Some(mismatches), calls)
}

#[derive(Clone, Debug)]
pub struct KangarooStructure {
    engine: StringEngine,
    pattern: DynStringId,
    text: DynStringId,
    k: usize,
    base: Counters,
    last_query_lcp_calls: u64,
}

impl KangarooStructure {
    pub fn new(pattern: &[Char], text: &[Char], k: usize, seed: u64) -> Result<Self> {
        let m = pattern.len();
        if m == 0 || text.len() < m || text.len() > 2 * m {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= m <= n <= 2m, got m={m}, n={}",
                text.len()
            )));
        }
        if k == 0 || k > m {
            return Err(Error::BadK { k, m });
        }
        let mut engine = StringEngine::new(seed);
        let pattern = engine.insert_string(pattern);
        let text = engine.insert_string(text);
        let base = engine.counters();
        Ok(KangarooStructure {
            engine,
            pattern,
            text,
            k,
            base,
            last_query_lcp_calls: 0,
        })
    }

    pub fn set_verify(&mut self, verify: bool) {
        self.engine.set_verify(verify);
    }

    pub fn engine(&self) -> &StringEngine {
        &self.engine
    }

    /// LCP calls spent by the most recent query.
    pub fn last_query_lcp_calls(&self) -> u64 {
        self.last_query_lcp_calls
    }
}

impl DynamicKMismatch for KangarooStructure {
    fn pattern_len(&self) -> usize {
        self.engine.length(self.pattern)
    }

    fn text_len(&self) -> usize {
        self.engine.length(self.text)
    }

    fn threshold(&self) -> usize {
        self.k
    }

    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()> {
        let id = match target {
            Target::Pattern => self.pattern,
            Target::Text => self.text,
        };
        self.engine.substitute(id, index, c).map(|_| ())
    }

    fn query(&mut self, i: usize) -> Result<Answer> {
        let (m, n) = (self.pattern_len(), self.text_len());
        if i > n - m {
            return Err(Error::IndexOutOfRange { index: i, len: n - m + 1 });
        }
        let p = self.engine.whole(self.pattern);
        let t = self.engine.fragment(self.text, i, i + m)?;
        let (d, calls) = mismatches_capped(&self.engine, p, t, self.k);
        self.last_query_lcp_calls = calls;
        Ok(d.map_or(Answer::Infinity, |d| Answer::Distance(d as u32)))
    }

    fn counters(&self) -> Counters {
        self.engine.counters() - self.base
    }
}
