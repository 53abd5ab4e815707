//! Deterministic work counters.
//!
//! Counters measure elementary operations rather than time so that two runs of
//! the same workload produce identical numbers.

use std::cell::Cell;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub lcp_calls: u64,
    pub char_comparisons: u64,
    pub set_ops: u64,
    pub conv_point_mults: u64,
    pub prefix_accesses: u64,
    pub rebuild_steps: u64,
    pub heavy_letters: u64,
    pub buffer_scans: u64,
}

impl Counters {
    pub const FIELD_NAMES: [&'static str; 8] = [
        "lcp_calls",
        "char_comparisons",
        "set_ops",
        "conv_point_mults",
        "prefix_accesses",
        "rebuild_steps",
        "heavy_letters",
        "buffer_scans",
    ];

    pub fn values(&self) -> [u64; 8] {
        [
            self.lcp_calls,
            self.char_comparisons,
            self.set_ops,
            self.conv_point_mults,
            self.prefix_accesses,
            self.rebuild_steps,
            self.heavy_letters,
            self.buffer_scans,
        ]
    }

    fn zip(self, other: Counters, f: impl Fn(u64, u64) -> u64) -> Counters {
        Counters {
            lcp_calls: f(self.lcp_calls, other.lcp_calls),
            char_comparisons: f(self.char_comparisons, other.char_comparisons),
            set_ops: f(self.set_ops, other.set_ops),
            conv_point_mults: f(self.conv_point_mults, other.conv_point_mults),
            prefix_accesses: f(self.prefix_accesses, other.prefix_accesses),
            rebuild_steps: f(self.rebuild_steps, other.rebuild_steps),
            heavy_letters: f(self.heavy_letters, other.heavy_letters),
            buffer_scans: f(self.buffer_scans, other.buffer_scans),
        }
    }
}

impl Add for Counters {
    type Output = Counters;
    fn add(self, rhs: Counters) -> Counters {
        self.zip(rhs, |a, b| a + b)
    }
}

impl AddAssign for Counters {
    fn add_assign(&mut self, rhs: Counters) {
        *self = *self + rhs;
    }
}

impl Sub for Counters {
    type Output = Counters;
    fn sub(self, rhs: Counters) -> Counters {
        self.zip(rhs, |a, b| a - b)
    }
}

/// Interior-mutable counter cell, so read-only paths such as LCP can still count.
#[derive(Debug, Default)]
pub struct Meter(Cell<Counters>);

impl Meter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record(&self, f: impl FnOnce(&mut Counters)) {
        let mut c = self.0.get();
        f(&mut c);
        self.0.set(c);
    }

    pub fn snapshot(&self) -> Counters {
        self.0.get()
    }
}

impl Clone for Meter {
    fn clone(&self) -> Self {
        Meter(Cell::new(self.0.get()))
    }
}
