//! Fast queries: epochs of `k` updates over a static `2k`-mismatch analysis.
//!
//! Each analysis window is stored either explicitly (every `2k`-mismatch
//! alignment with its distance) or by its periodic structure: the mismatches
//! of `P` and `T'` against `Q*` plus sparse corrections `mu_j`, which give
//!
//! `HD(P, T'[jq..jq+m)) = |MP| + |MT ∩ [jq, jq+m)| - mu_j`
//!
//! where `mu_j` sums `2 - [T'[tau] != P[rho]]` over pairs with `tau = jq + rho`.

use std::collections::{BTreeMap, BTreeSet};

use crate::counters::Meter;
use crate::engine::Char;
use crate::error::{Error, Result};
use crate::kangaroo::mismatches_capped;
use crate::lazy::{Amortized, Deamortized, EpochScheme, Strings};
use crate::matcher::{analysis_windows, classify, window_for, AnalysisResult, DichotomyParams, OccurrenceSet, PeriodicStructure};
use crate::types::{Answer, Target, Update};

/// Ordered set over `[0, capacity)` with rank and predecessor queries.
#[derive(Clone, Debug)]
pub struct RankedSet {
    tree: Vec<u32>,
    members: BTreeSet<usize>,
}

impl RankedSet {
    pub fn new(capacity: usize) -> Self {
        RankedSet {
            tree: vec![0; capacity + 1],
            members: BTreeSet::new(),
        }
    }

    fn add(&mut self, x: usize, delta: i32) {
        let mut i = x + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i].wrapping_add_signed(delta);
            i += i & i.wrapping_neg();
        }
    }

    pub fn insert(&mut self, x: usize) -> bool {
        let fresh = self.members.insert(x);
        if fresh {
            self.add(x, 1);
        }
        fresh
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let present = self.members.remove(&x);
        if present {
            self.add(x, -1);
        }
        present
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(&x)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// Number of members `< x`.
    pub fn rank(&self, x: usize) -> usize {
        let mut i = x.min(self.tree.len() - 1);
        let mut r = 0;
        while i > 0 {
            r += self.tree[i] as usize;
            i &= i - 1;
        }
        r
    }

    /// Members in `[l, r)`.
    pub fn count_range(&self, l: usize, r: usize) -> usize {
        if r <= l {
            return 0;
        }
        self.rank(r) - self.rank(l)
    }

    /// Largest member `<= x`.
    pub fn predecessor(&self, x: usize) -> Option<usize> {
        self.members.range(..=x).next_back().copied()
    }
}

fn contribution(t: Char, p: Char) -> i64 {
    2 - i64::from(t != p)
}

/// Periodic representation of one analysis window.
#[derive(Clone, Debug)]
pub struct PeriodicRep {
    start: usize,
    end: usize,
    period: Vec<Char>,
    pattern_mismatches: BTreeSet<usize>,
    text_mismatches: RankedSet,
    mu: BTreeMap<usize, i64>,
    max_j: usize,
}

impl PeriodicRep {
    /// `window_start` is the offset of the analysed fragment in the text.
    /// Returns the representation and the steps spent.
    pub fn build(pattern: &[Char], text: &[Char], window_start: usize, s: &PeriodicStructure) -> (Self, u64) {
        let (start, end) = (window_start + s.start, window_start + s.end);
        let mut text_mismatches = RankedSet::new(end - start);
        for &tau in &s.text_mismatches {
            text_mismatches.insert(tau);
        }
        let mut rep = PeriodicRep {
            start,
            end,
            max_j: (end - start - pattern.len()) / s.period.len(),
            period: s.period.clone(),
            pattern_mismatches: s.pattern_mismatches.iter().copied().collect(),
            text_mismatches,
            mu: BTreeMap::new(),
        };
        for &rho in &s.pattern_mismatches {
            for &tau in &s.text_mismatches {
                if let Some(j) = rep.pair_index(tau, rho) {
                    rep.add_mu(j, contribution(text[start + tau], pattern[rho]));
                }
            }
        }
        let (a, b) = (s.pattern_mismatches.len() as u64, s.text_mismatches.len() as u64);
        (rep, a + b + a * b)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn period(&self) -> &[Char] {
        &self.period
    }

    pub fn pattern_mismatches(&self) -> impl Iterator<Item = usize> + '_ {
        self.pattern_mismatches.iter().copied()
    }

    /// Positions relative to `start`.
    pub fn text_mismatches(&self) -> impl Iterator<Item = usize> + '_ {
        self.text_mismatches.iter()
    }

    pub fn max_j(&self) -> usize {
        self.max_j
    }

    pub fn mu(&self, j: usize) -> i64 {
        self.mu.get(&j).copied().unwrap_or(0)
    }

    /// Number of stored (non-zero) corrections.
    pub fn mu_support(&self) -> usize {
        self.mu.len()
    }

    /// `mu_j` recomputed from scratch over all pairs.
    pub fn mu_brute(&self, pattern: &[Char], text: &[Char], j: usize) -> i64 {
        let q = self.period.len();
        self.pattern_mismatches
            .iter()
            .filter(|&&rho| self.text_mismatches.contains(j * q + rho))
            .map(|&rho| contribution(text[self.start + j * q + rho], pattern[rho]))
            .sum()
    }

    /// The distance formula at `T'[jq..jq+m)`.
    pub fn distance(&self, j: usize, m: usize) -> i64 {
        let lo = j * self.period.len();
        (self.pattern_mismatches.len() + self.text_mismatches.count_range(lo, lo + m)) as i64 - self.mu(j)
    }

    fn pair_index(&self, tau: usize, rho: usize) -> Option<usize> {
        let q = self.period.len();
        if tau < rho || !(tau - rho).is_multiple_of(q) {
            return None;
        }
        let j = (tau - rho) / q;
        (j <= self.max_j).then_some(j)
    }

    fn add_mu(&mut self, j: usize, delta: i64) {
        let v = self.mu.entry(j).or_insert(0);
        *v += delta;
        if *v == 0 {
            self.mu.remove(&j);
        }
    }

    fn update_pattern(&mut self, rho: usize, old: Char, new: Char, text: &[Char]) -> u64 {
        let mut ops = 0;
        let taus: Vec<usize> = self.text_mismatches.iter().collect();
        if self.pattern_mismatches.contains(&rho) {
            for &tau in &taus {
                ops += 1;
                if let Some(j) = self.pair_index(tau, rho) {
                    self.add_mu(j, -contribution(text[self.start + tau], old));
                }
            }
        }
        if new != self.period[rho % self.period.len()] {
            self.pattern_mismatches.insert(rho);
            for &tau in &taus {
                ops += 1;
                if let Some(j) = self.pair_index(tau, rho) {
                    self.add_mu(j, contribution(text[self.start + tau], new));
                }
            }
        } else {
            self.pattern_mismatches.remove(&rho);
        }
        ops + 1
    }

    fn update_text(&mut self, position: usize, old: Char, new: Char, pattern: &[Char]) -> u64 {
        if position < self.start || position >= self.end {
            return 0;
        }
        let tau = position - self.start;
        let mut ops = 0;
        let rhos: Vec<usize> = self.pattern_mismatches.iter().copied().collect();
        if self.text_mismatches.contains(tau) {
            for &rho in &rhos {
                ops += 1;
                if let Some(j) = self.pair_index(tau, rho) {
                    self.add_mu(j, -contribution(old, pattern[rho]));
                }
            }
        }
        if new != self.period[tau % self.period.len()] {
            self.text_mismatches.insert(tau);
            for &rho in &rhos {
                ops += 1;
                if let Some(j) = self.pair_index(tau, rho) {
                    self.add_mu(j, contribution(new, pattern[rho]));
                }
            }
        } else {
            self.text_mismatches.remove(tau);
        }
        ops + 1
    }

    fn query(&self, i: usize, m: usize) -> Option<usize> {
        let q = self.period.len();
        if i < self.start || i + m > self.end || !(i - self.start).is_multiple_of(q) {
            return None;
        }
        let d = self.distance((i - self.start) / q, m);
        debug_assert!(d >= 0);
        Some(d as usize)
    }
}

#[derive(Clone, Debug)]
pub enum WindowState {
    /// Alignment (global text position) to distance.
    Explicit(BTreeMap<usize, u32>),
    Periodic(PeriodicRep),
}

/// Adjusts stored distances for an update already applied to `pattern`/`text`.
/// Returns the number of character comparisons.
pub(crate) fn adjust_explicit(map: &mut BTreeMap<usize, u32>, pattern: &[Char], text: &[Char], update: &Update) -> u64 {
    let m = pattern.len();
    let mut comparisons = 0;
    let mut fix = |d: &mut u32, other: Char| {
        comparisons += 2;
        let before = u32::from(update.old != other);
        let after = u32::from(update.new != other);
        *d = *d + after - before;
    };
    match update.target {
        Target::Pattern => {
            for (&i, d) in map.iter_mut() {
                fix(d, text[i + update.index]);
            }
        }
        Target::Text => {
            let p = update.index;
            for (&i, d) in map.range_mut(p.saturating_sub(m - 1)..=p) {
                fix(d, pattern[p - i]);
            }
        }
    }
    comparisons
}

#[derive(Clone, Debug)]
pub struct EpochState {
    windows: Vec<(usize, usize)>,
    parts: Vec<WindowState>,
    updates_left: usize,
}

impl EpochState {
    pub fn windows(&self) -> &[(usize, usize)] {
        &self.windows
    }

    pub fn parts(&self) -> &[WindowState] {
        &self.parts
    }

    pub fn is_periodic(&self) -> bool {
        self.parts.iter().any(|p| matches!(p, WindowState::Periodic(_)))
    }

    /// The uncapped distance stored for `i` in window `w`, if `i` is relevant there.
    pub fn window_distance(&self, w: usize, i: usize, m: usize) -> Option<usize> {
        let (s, e) = self.windows[w];
        if i < s || i + m > e {
            return None;
        }
        match &self.parts[w] {
            WindowState::Explicit(map) => map.get(&i).map(|&d| d as usize),
            WindowState::Periodic(rep) => rep.query(i, m),
        }
    }
}

/// Resumable rebuild.
#[derive(Clone, Debug)]
pub struct EpochJob {
    windows: Vec<(usize, usize)>,
    window: usize,
    next: usize,
    occ: OccurrenceSet,
    parts: Vec<WindowState>,
    allowance: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct FastQueryScheme {
    k: usize,
    params: DichotomyParams,
}

impl FastQueryScheme {
    pub fn new(k: usize, params: DichotomyParams) -> Self {
        FastQueryScheme { k, params }
    }

    fn finish_window(&self, strings: &Strings, window: (usize, usize), occ: OccurrenceSet, meter: &Meter) -> Result<(WindowState, u64)> {
        let threshold = 2 * self.k;
        let engine = strings.engine();
        let p = strings.pattern();
        let t = strings.text_fragment(window.0, window.1);
        // Relaxed constants may fail to produce a structure; keep a copy to fall back on.
        let fallback = (!self.params.is_default() && occ.len() > self.params.occurrence_limit(threshold)).then(|| occ.clone());
        let explicit = |occ: OccurrenceSet| {
            let map: BTreeMap<usize, u32> = occ.entries().iter().map(|&(i, d)| (window.0 + i, d)).collect();
            let steps = map.len() as u64;
            meter.record(|c| c.set_ops += steps);
            (WindowState::Explicit(map), steps)
        };
        match classify(engine, p, t, occ, threshold, self.params) {
            Ok((AnalysisResult::Explicit(occ), steps)) => {
                let (state, s) = explicit(occ);
                Ok((state, steps + s))
            }
            Ok((AnalysisResult::Periodic(ps), steps)) => {
                let (rep, s) = PeriodicRep::build(strings.pattern_chars(), strings.text_chars(), window.0, &ps);
                meter.record(|c| c.set_ops += s);
                Ok((WindowState::Periodic(rep), steps + s))
            }
            Err(Error::StructureNotFound { .. }) if fallback.is_some() => {
                let (state, s) = explicit(fallback.expect("checked"));
                Ok((state, s))
            }
            Err(e) => Err(e),
        }
    }
}

impl EpochScheme for FastQueryScheme {
    type State = EpochState;
    type Job = EpochJob;

    fn begin(&self, strings: &Strings, allowance: usize) -> EpochJob {
        EpochJob {
            windows: analysis_windows(strings.n(), strings.m()),
            window: 0,
            next: 0,
            occ: OccurrenceSet::new(2 * self.k),
            parts: Vec::new(),
            allowance,
        }
    }

    fn advance(&self, job: &mut EpochJob, strings: &Strings, budget: u64, meter: &Meter) -> Result<u64> {
        let m = strings.m();
        let p = strings.pattern();
        let mut spent = 0;
        while job.window < job.windows.len() && spent < budget {
            let (s, e) = job.windows[job.window];
            if s + job.next + m <= e {
                let t = strings.text_fragment(s + job.next, s + job.next + m);
                let (d, calls) = mismatches_capped(strings.engine(), p, t, 2 * self.k);
                spent += calls;
                if let Some(d) = d {
                    job.occ.push(job.next, d as u32);
                }
                job.next += 1;
            } else {
                let occ = std::mem::replace(&mut job.occ, OccurrenceSet::new(2 * self.k));
                let (part, steps) = self.finish_window(strings, (s, e), occ, meter)?;
                spent += steps;
                job.parts.push(part);
                job.window += 1;
                job.next = 0;
            }
        }
        Ok(spent)
    }

    fn finished(&self, job: &EpochJob) -> bool {
        job.window == job.windows.len()
    }

    fn finish_job(&self, job: EpochJob) -> EpochState {
        EpochState {
            windows: job.windows,
            parts: job.parts,
            updates_left: job.allowance,
        }
    }

    fn updates_left(&self, state: &EpochState) -> usize {
        state.updates_left
    }

    fn apply_update(&self, state: &mut EpochState, strings: &Strings, update: &Update, meter: &Meter) -> Result<()> {
        if state.updates_left == 0 {
            return Err(Error::EpochExhausted);
        }
        state.updates_left -= 1;
        if update.old == update.new {
            return Ok(());
        }
        let (pattern, text) = (strings.pattern_chars(), strings.text_chars());
        for part in &mut state.parts {
            match part {
                WindowState::Explicit(map) => {
                    let cmp = adjust_explicit(map, pattern, text, update);
                    meter.record(|c| c.char_comparisons += cmp);
                }
                WindowState::Periodic(rep) => {
                    let ops = match update.target {
                        Target::Pattern => rep.update_pattern(update.index, update.old, update.new, text),
                        Target::Text => rep.update_text(update.index, update.old, update.new, pattern),
                    };
                    meter.record(|c| c.set_ops += ops);
                }
            }
        }
        Ok(())
    }

    fn query(&self, state: &EpochState, strings: &Strings, i: usize, meter: &Meter) -> Result<Answer> {
        let m = strings.m();
        let w = window_for(&state.windows, i, m).expect("windows cover every alignment");
        if matches!(state.parts[w], WindowState::Periodic(_)) {
            meter.record(|c| c.set_ops += 2);
        }
        Ok(state
            .window_distance(w, i, m)
            .map_or(Answer::Infinity, |d| Answer::capped(d, self.k)))
    }

    fn threshold(&self) -> usize {
        self.k
    }
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        Err(Error::BadK { k, m })
    } else {
        Ok(())
    }
}

/// Amortized fast-query structure rebuilt every `epoch_len` updates
/// (`epoch_len <= k`; 1 rebuilds after every update).
pub fn fast_query(
    pattern: &[Char],
    text: &[Char],
    k: usize,
    seed: u64,
    epoch_len: usize,
    params: DichotomyParams,
) -> Result<Amortized<FastQueryScheme>> {
    check_k(k, pattern.len())?;
    if epoch_len == 0 || epoch_len > k {
        return Err(Error::InvalidConfig(format!("epoch length {epoch_len} outside [1, {k}]")));
    }
    Amortized::new(FastQueryScheme::new(k, params), pattern, text, seed, epoch_len)
}

/// Two-instance fast-query structure; needs `k >= 2`.
pub fn fast_query_deamortized(
    pattern: &[Char],
    text: &[Char],
    k: usize,
    seed: u64,
    params: DichotomyParams,
) -> Result<Deamortized<FastQueryScheme>> {
    check_k(k, pattern.len())?;
    Deamortized::new(FastQueryScheme::new(k, params), pattern, text, seed)
}
