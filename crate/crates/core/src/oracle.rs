//! Brute-force reference implementations.
//!
//! Everything here is a direct transcription of a definition: nested loops,
//! no shared state with the structures under test.

use std::collections::BTreeSet;

use crate::counters::{Counters, Meter};
use crate::engine::Char;
use crate::error::{Error, Result};
use crate::harness::workload::{Record, Workload};
use crate::matcher::OccurrenceSet;
use crate::types::{Answer, DynamicKMismatch, Target};

pub fn hd(a: &[Char], b: &[Char]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// `M(S, Q*) = { i : S[i] != Q[i mod |Q|] }`.
pub fn mismatches_vs_qstar(s: &[Char], q: &[Char]) -> Result<Vec<usize>> {
    if q.is_empty() {
        return Err(Error::EmptyQ);
    }
    Ok((0..s.len()).filter(|&i| s[i] != q[i % q.len()]).collect())
}

/// `HD(S, Q*)`.
pub fn hd_qstar(s: &[Char], q: &[Char]) -> Result<usize> {
    mismatches_vs_qstar(s, q).map(|v| v.len())
}

/// `Occ_k(P, T)` with exact distances; empty when `|P| > |T|`.
pub fn occ_k_naive(p: &[Char], t: &[Char], k: usize) -> OccurrenceSet {
    let m = p.len();
    let mut entries = Vec::new();
    if m <= t.len() {
        for i in 0..=t.len() - m {
            let d = hd(p, &t[i..i + m]).expect("equal lengths");
            if d <= k {
                entries.push((i, d as u32));
            }
        }
    }
    OccurrenceSet::from_entries(k, entries)
}

/// `[T ⊗ P](i)` for `i in [0, |T| + |P|)`: the number of pairs `(a, j)` with
/// `T[a] = P[j]` and `a + (m - 1 - j) = i`. Zero outside that range.
pub fn cross_corr_naive(t: &[Char], p: &[Char]) -> Vec<i64> {
    let m = p.len();
    let mut out = vec![0i64; t.len() + m];
    for (a, &tc) in t.iter().enumerate() {
        for (j, &pc) in p.iter().enumerate() {
            if tc == pc {
                out[a + m - 1 - j] += 1;
            }
        }
    }
    out
}

/// `Δρ[Δρ[T ⊗ P]](i)` for `i in [0, |T| + |P| + 2ρ)`, by differencing the
/// naive cross-correlation.
pub fn second_difference_naive(t: &[Char], p: &[Char], rho: usize) -> Vec<i64> {
    let f = cross_corr_naive(t, p);
    let at = |i: isize| -> i64 {
        if i < 0 || i as usize >= f.len() {
            0
        } else {
            f[i as usize]
        }
    };
    let r = rho as isize;
    (0..f.len() + 2 * rho)
        .map(|i| {
            let i = i as isize;
            at(i) - 2 * at(i - r) + at(i - 2 * r)
        })
        .collect()
}

/// `Σ_c ‖Δρ[X_c]‖₀`, enumerating every letter of `x` and every index.
pub fn difference_support_naive(x: &[Char], rho: usize) -> usize {
    let letters: BTreeSet<Char> = x.iter().copied().collect();
    let indicator = |c: Char, i: isize| -> i64 {
        (i >= 0 && (i as usize) < x.len() && x[i as usize] == c) as i64
    };
    letters
        .iter()
        .map(|&c| {
            (0..(x.len() + rho) as isize)
                .filter(|&i| indicator(c, i) - indicator(c, i - rho as isize) != 0)
                .count()
        })
        .sum()
}

/// `HD(X[ρ..), X[..|X|-ρ))`; `ρ` is a d-period of `X` iff this is at most `d`.
pub fn shift_mismatches(x: &[Char], rho: usize) -> usize {
    assert!(rho >= 1 && rho <= x.len());
    hd(&x[rho..], &x[..x.len() - rho]).expect("equal lengths")
}

/// Reference structure: a plain array and per-query distance computation.
#[derive(Clone, Debug)]
pub struct NaiveStructure {
    pattern: Vec<Char>,
    text: Vec<Char>,
    k: usize,
    meter: Meter,
}

impl NaiveStructure {
    pub fn new(pattern: &[Char], text: &[Char], k: usize) -> Self {
        NaiveStructure {
            pattern: pattern.to_vec(),
            text: text.to_vec(),
            k,
            meter: Meter::new(),
        }
    }

    pub fn pattern(&self) -> &[Char] {
        &self.pattern
    }

    pub fn text(&self) -> &[Char] {
        &self.text
    }
}

impl DynamicKMismatch for NaiveStructure {
    fn pattern_len(&self) -> usize {
        self.pattern.len()
    }

    fn text_len(&self) -> usize {
        self.text.len()
    }

    fn threshold(&self) -> usize {
        self.k
    }

    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()> {
        let s = match target {
            Target::Pattern => &mut self.pattern,
            Target::Text => &mut self.text,
        };
        let len = s.len();
        *s.get_mut(index).ok_or(Error::IndexOutOfRange { index, len })? = c;
        Ok(())
    }

    fn query(&mut self, i: usize) -> Result<Answer> {
        let m = self.pattern.len();
        if i + m > self.text.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.text.len() + 1 - m,
            });
        }
        self.meter.record(|c| c.char_comparisons += m as u64);
        Ok(Answer::capped(hd(&self.pattern, &self.text[i..i + m])?, self.k))
    }

    fn counters(&self) -> Counters {
        self.meter.snapshot()
    }
}

/// Wraps a structure and corrupts the answer of one chosen query, so that
/// divergence detection can be tested.
#[derive(Debug)]
pub struct FaultInjector<S> {
    inner: S,
    fault_at_query: usize,
    queries_seen: usize,
}

impl<S: DynamicKMismatch> FaultInjector<S> {
    /// Corrupts the `fault_at_query`-th query (0-based, counting queries only).
    pub fn new(inner: S, fault_at_query: usize) -> Self {
        FaultInjector {
            inner,
            fault_at_query,
            queries_seen: 0,
        }
    }
}

impl<S: DynamicKMismatch> DynamicKMismatch for FaultInjector<S> {
    fn pattern_len(&self) -> usize {
        self.inner.pattern_len()
    }
    fn text_len(&self) -> usize {
        self.inner.text_len()
    }
    fn threshold(&self) -> usize {
        self.inner.threshold()
    }
    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()> {
        self.inner.update(target, index, c)
    }
    fn query(&mut self, i: usize) -> Result<Answer> {
        let a = self.inner.query(i)?;
        let n = self.queries_seen;
        self.queries_seen += 1;
        if n != self.fault_at_query {
            return Ok(a);
        }
        let k = self.threshold() as u32;
        Ok(match a {
            Answer::Distance(d) if d < k => Answer::Distance(d + 1),
            Answer::Distance(d) => Answer::Distance(d - 1),
            Answer::Infinity => Answer::Distance(k),
        })
    }
    fn counters(&self) -> Counters {
        self.inner.counters()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub op_index: usize,
    pub got: Answer,
    pub expected: Answer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialReport {
    pub ops_executed: usize,
    pub queries_checked: usize,
    pub divergence: Option<Divergence>,
}

impl DifferentialReport {
    pub fn is_success(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Replays `workload` on `structure` and on a [`NaiveStructure`] in lockstep,
/// stopping at the first query whose answers differ.
pub fn differential_run(workload: &Workload, structure: &mut dyn DynamicKMismatch) -> Result<DifferentialReport> {
    let h = &workload.header;
    let mut reference = NaiveStructure::new(&h.pattern, &h.text, h.config.k);
    let mut queries_checked = 0;
    for (op_index, record) in workload.records.iter().enumerate() {
        match *record {
            Record::Update { target, index, char } => {
                reference.update(target, index, char)?;
                structure.update(target, index, char)?;
            }
            Record::Query { index, .. } => {
                let expected = reference.query(index)?;
                let got = structure.query(index)?;
                queries_checked += 1;
                if got != expected {
                    return Ok(DifferentialReport {
                        ops_executed: op_index + 1,
                        queries_checked,
                        divergence: Some(Divergence { op_index, got, expected }),
                    });
                }
            }
        }
    }
    Ok(DifferentialReport {
        ops_executed: workload.records.len(),
        queries_checked,
        divergence: None,
    })
}
