//! Static k-mismatch solver and structure analyzer.
//!
//! [`analyze`] either lists every k-mismatch occurrence explicitly (when there
//! are at most `864k` of them) or returns a periodic description: a primitive
//! string `Q` with `|Q| <= m/(128k)`, the window `T' = T[min Occ .. m + max Occ)`
//! and the mismatch sets of `P` and `T'` against the cyclic extension of `Q`.
//! The periodic branch is verified by direct recomputation before returning.

use std::collections::HashMap;

use crate::engine::{Char, Fragment, StringEngine};
use crate::error::{Error, Result};
use crate::kangaroo::mismatches_capped;

/// Positions with their exact distances, strictly increasing, all `<= threshold`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OccurrenceSet {
    pub threshold: usize,
    entries: Vec<(usize, u32)>,
}

impl OccurrenceSet {
    pub fn new(threshold: usize) -> Self {
        OccurrenceSet {
            threshold,
            entries: Vec::new(),
        }
    }

    /// Builds a set from `(position, distance)` pairs; panics if they are not
    /// strictly increasing or exceed the threshold.
    pub fn from_entries(threshold: usize, entries: Vec<(usize, u32)>) -> Self {
        assert!(entries.windows(2).all(|w| w[0].0 < w[1].0), "positions must increase");
        assert!(entries.iter().all(|&(_, d)| d as usize <= threshold));
        OccurrenceSet { threshold, entries }
    }

    pub(crate) fn push(&mut self, position: usize, distance: u32) {
        debug_assert!(self.entries.last().is_none_or(|&(p, _)| p < position));
        self.entries.push((position, distance));
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn distance_at(&self, position: usize) -> Option<u32> {
        self.entries
            .binary_search_by_key(&position, |&(p, _)| p)
            .ok()
            .map(|idx| self.entries[idx].1)
    }
}

/// `count` positions `start + t*difference` sharing one distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Progression {
    pub start: usize,
    pub difference: usize,
    pub count: usize,
    pub distance: u32,
}

/// Run-length view of an [`OccurrenceSet`]; every progression uses `difference`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionSet {
    pub threshold: usize,
    pub difference: usize,
    pub progressions: Vec<Progression>,
}

impl ProgressionSet {
    pub fn expand(&self) -> OccurrenceSet {
        let mut out = OccurrenceSet::new(self.threshold);
        for p in &self.progressions {
            for t in 0..p.count {
                out.push(p.start + t * p.difference, p.distance);
            }
        }
        out
    }
}

/// Greedy maximal progressions with the common difference set to the
/// smallest gap between occurrences (1 when there are fewer than two).
pub fn compact(occ: &OccurrenceSet) -> ProgressionSet {
    let q = occ
        .entries
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .min()
        .unwrap_or(1);
    let mut progressions: Vec<Progression> = Vec::new();
    for &(pos, d) in &occ.entries {
        // Two occurrences exactly q apart are adjacent in sorted order.
        match progressions.last_mut() {
            Some(last) if last.distance == d && last.start + last.count * q == pos => last.count += 1,
            _ => progressions.push(Progression {
                start: pos,
                difference: q,
                count: 1,
                distance: d,
            }),
        }
    }
    ProgressionSet {
        threshold: occ.threshold,
        difference: q,
        progressions,
    }
}

/// Constants of the occurrence-count dichotomy.
///
/// [`DichotomyParams::default`] is the proven setting (`864k` occurrences,
/// periods up to `m/(128k)`). Smaller constants are only useful for exercising
/// the periodic machinery on small inputs; with them the periodic structure is
/// no longer guaranteed to exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DichotomyParams {
    pub occurrence_factor: usize,
    pub period_divisor: usize,
}

impl Default for DichotomyParams {
    fn default() -> Self {
        DichotomyParams {
            occurrence_factor: 864,
            period_divisor: 128,
        }
    }
}

impl DichotomyParams {
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }

    pub fn occurrence_limit(&self, k: usize) -> usize {
        self.occurrence_factor * k
    }

    pub fn max_period(&self, m: usize, k: usize) -> usize {
        m / (self.period_divisor * k)
    }
}

/// Periodic outcome of [`analyze`]. Positions in `text_mismatches` are
/// relative to `T' = text[start..end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicStructure {
    pub start: usize,
    pub end: usize,
    pub period: Vec<Char>,
    pub pattern_mismatches: Vec<usize>,
    pub text_mismatches: Vec<usize>,
    pub occurrences: OccurrenceSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnalysisResult {
    Explicit(OccurrenceSet),
    Periodic(PeriodicStructure),
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        Err(Error::BadK { k, m })
    } else {
        Ok(())
    }
}

/// `Occ_k(P, T)` with exact distances, counting mismatches per alignment with
/// at most `k + 1` LCP calls each.
pub fn occ_k(engine: &StringEngine, p: Fragment, t: Fragment, k: usize) -> Result<OccurrenceSet> {
    check_k(k, p.len())?;
    if p.len() > t.len() {
        return Err(Error::PreconditionViolation("pattern longer than text".into()));
    }
    Ok(scan_occurrences(engine, p, t, k).0)
}

/// Unchecked scan; also returns the number of LCP calls made.
pub(crate) fn scan_occurrences(engine: &StringEngine, p: Fragment, t: Fragment, threshold: usize) -> (OccurrenceSet, u64) {
    let mut occ = OccurrenceSet::new(threshold);
    let mut calls = 0;
    let m = p.len();
    for i in 0..=t.len().saturating_sub(m) {
        if t.len() < m {
            break;
        }
        let window = Fragment {
            source: t.source,
            start: t.start + i,
            end: t.start + i + m,
        };
        let (d, c) = mismatches_capped(engine, p, window, threshold);
        calls += c;
        if let Some(d) = d {
            occ.push(i, d as u32);
        }
    }
    (occ, calls)
}

/// True iff `q` is not `r^e` for any `e >= 2`: `q` occurs in `qq` only at
/// positions `0` and `|q|`.
pub fn is_primitive(q: &[Char]) -> bool {
    assert!(!q.is_empty());
    let doubled: Vec<Char> = q.iter().chain(q).copied().collect();
    !(1..q.len()).any(|s| doubled[s..s + q.len()] == *q)
}

/// Smallest `q <= m/(128k)` whose per-residue majority string `Q` has
/// `HD(P, Q*) < 2k`, returned as `Q`.
pub fn find_period(p: &[Char], k: usize) -> Option<Vec<Char>> {
    find_period_with(p, k, DichotomyParams::default()).0
}

/// Same as [`find_period`] with explicit constants; also reports the number of
/// characters examined.
pub fn find_period_with(p: &[Char], k: usize, params: DichotomyParams) -> (Option<Vec<Char>>, u64) {
    let m = p.len();
    let mut work = 0u64;
    if k == 0 {
        return (None, work);
    }
    let mut counts: HashMap<Char, usize> = HashMap::new();
    for q in 1..=params.max_period(m, k) {
        let mut period = Vec::with_capacity(q);
        let mut agreeing = 0;
        for r in 0..q.min(m) {
            counts.clear();
            for &c in p[r..].iter().step_by(q) {
                *counts.entry(c).or_default() += 1;
            }
            work += p[r..].len().div_ceil(q) as u64;
            // Majority with ties to the smallest code point.
            let (&c, &cnt) = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .expect("residue class is non-empty");
            period.push(c);
            agreeing += cnt;
        }
        if m - agreeing < 2 * k {
            // A non-primitive majority string R^e would already have been accepted at |R| < q.
            assert!(is_primitive(&period), "first accepted majority string must be primitive");
            return (Some(period), work);
        }
    }
    (None, work)
}

/// `M(S, Q*)`: positions where `s` differs from the cyclic extension of `q`.
pub(crate) fn qstar_mismatches(s: &[Char], q: &[Char]) -> Vec<usize> {
    s.iter()
        .enumerate()
        .filter(|&(i, &c)| c != q[i % q.len()])
        .map(|(i, _)| i)
        .collect()
}

/// Runs the dichotomy on a precomputed `Occ_k(P, T)` (positions relative to `t`).
/// Returns the result and the number of elementary steps spent.
pub(crate) fn classify(
    engine: &StringEngine,
    p: Fragment,
    t: Fragment,
    occ: OccurrenceSet,
    k: usize,
    params: DichotomyParams,
) -> Result<(AnalysisResult, u64)> {
    let limit = params.occurrence_limit(k);
    if occ.len() <= limit {
        return Ok((AnalysisResult::Explicit(occ), 0));
    }
    let not_found = Error::StructureNotFound { limit };
    let pattern = engine.fragment_chars(&p);
    let m = pattern.len();
    let (period, mut work) = find_period_with(pattern, k, params);
    let period = period.ok_or(not_found.clone())?;
    let q = period.len();
    let start = occ.positions().next().expect("non-empty");
    let end = m + occ.positions().last().expect("non-empty");
    let text = &engine.fragment_chars(&t)[start..end];
    let pattern_mismatches = qstar_mismatches(pattern, &period);
    let text_mismatches = qstar_mismatches(text, &period);
    work += (m + text.len()) as u64;
    let verified = q <= params.max_period(m, k)
        && pattern_mismatches.len() < 2 * k
        && text_mismatches.len() < 6 * k
        && is_primitive(&period)
        && occ.positions().all(|i| (i - start).is_multiple_of(q));
    if !verified {
        return Err(not_found);
    }
    Ok((
        AnalysisResult::Periodic(PeriodicStructure {
            start,
            end,
            period,
            pattern_mismatches,
            text_mismatches,
            occurrences: occ,
        }),
        work,
    ))
}

/// The static analysis with the proven constants. Requires `|t| <= ceil(3m/2)`.
pub fn analyze(engine: &StringEngine, p: Fragment, t: Fragment, k: usize) -> Result<AnalysisResult> {
    analyze_with(engine, p, t, k, DichotomyParams::default())
}

pub fn analyze_with(
    engine: &StringEngine,
    p: Fragment,
    t: Fragment,
    k: usize,
    params: DichotomyParams,
) -> Result<AnalysisResult> {
    let m = p.len();
    check_k(k, m)?;
    if t.len() > (3 * m).div_ceil(2) {
        return Err(Error::PreconditionViolation(format!(
            "analysis window of length {} exceeds 3m/2 for m = {m}",
            t.len()
        )));
    }
    let (occ, _) = scan_occurrences(engine, p, t, k);
    classify(engine, p, t, occ, k, params).map(|(r, _)| r)
}

/// The windows `[start, end)` of the text that the dichotomy is applied to:
/// the whole text when `n <= ceil(3m/2)`, otherwise a prefix and a suffix of
/// that length, which overlap by at least `m`.
pub fn analysis_windows(n: usize, m: usize) -> Vec<(usize, usize)> {
    let w = n.min((3 * m).div_ceil(2));
    if w == n {
        vec![(0, n)]
    } else {
        vec![(0, w), (n - w, n)]
    }
}

/// Index of the first window that fully contains the alignment at `i`.
pub fn window_for(windows: &[(usize, usize)], i: usize, m: usize) -> Option<usize> {
    windows.iter().position(|&(s, e)| s <= i && i + m <= e)
}
