//! Dynamic k-mismatch: Hamming distances between a pattern and text windows,
//! maintained under single-character substitutions.
//!
//! Three structures share the [`DynamicKMismatch`] interface:
//!
//! - [`kangaroo::KangarooStructure`]: cheap updates, queries by iterated
//!   longest-common-extension ("kangaroo") jumps.
//! - [`epoch`]: cheap queries, epochs of `k` updates with a doubled-threshold
//!   rebuild that is either an explicit occurrence table or a periodic
//!   representation.
//! - [`tradeoff`]: a parameter `x` balances update and query work through
//!   buffered maintenance of sparse second differences of the
//!   cross-correlation.
//!
//! Everything is checked against the brute-force [`oracle`]. The [`harness`]
//! module generates workloads, replays them with deterministic work counters,
//! and writes CSV reports.

pub mod counters;
pub mod engine;
pub mod epoch;
pub mod error;
pub mod harness;
pub mod kangaroo;
pub mod lazy;
pub mod matcher;
pub mod oracle;
pub mod tradeoff;

mod types;

pub use counters::{Counters, Meter};
pub use engine::{ArithmeticProgression, Char, DynStringId, Fragment, StringEngine};
pub use error::{Error, Result};
pub use types::{Answer, DynamicKMismatch, Target, Update};
