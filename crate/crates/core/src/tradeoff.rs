//! Query/update trade-off through sparse second differences.
//!
//! After a `2k`-mismatch rebuild with many occurrences, the minimum gap `rho`
//! of the occurrences is an approximate period of both strings, so the
//! per-letter differences `Δρ[T'_c]` and `Δρ[P^R_c]` are sparse. Their
//! convolutions sum to the second difference `D` of the cross-correlation
//! `T' ⊗ P`, from which any single value is recovered with two prefix sums
//! over one residue class mod `rho`. Updates patch the differences at once;
//! convolutions are brought up to date every `x` updates, and queries correct
//! the stale value by scanning the buffered updates.

use std::collections::{BTreeMap, BTreeSet};

use crate::counters::Meter;
use crate::engine::Char;
use crate::epoch::adjust_explicit;
use crate::error::{Error, Result};
use crate::kangaroo::mismatches_capped;
use crate::lazy::{Amortized, Deamortized, EpochScheme, Strings};
use crate::matcher::OccurrenceSet;
use crate::types::{Answer, Target, Update};

/// Sparse integer function, zeros omitted.
pub type SparseFn = BTreeMap<usize, i64>;

fn add_point(f: &mut SparseFn, i: usize, v: i64) {
    if v == 0 {
        return;
    }
    let e = f.entry(i).or_insert(0);
    *e += v;
    if *e == 0 {
        f.remove(&i);
    }
}

/// `Δρ[X_c](i) = X_c(i) - X_c(i - rho)` for every letter `c`, over `i ∈ [0, |x| + rho)`.
pub fn letter_differences(x: &[Char], rho: usize) -> BTreeMap<Char, SparseFn> {
    let mut out: BTreeMap<Char, SparseFn> = BTreeMap::new();
    for i in 0..x.len() + rho {
        let a = x.get(i);
        let b = if i >= rho { x.get(i - rho) } else { None };
        if a == b {
            continue;
        }
        if let Some(&a) = a {
            add_point(out.entry(a).or_default(), i, 1);
        }
        if let Some(&b) = b {
            add_point(out.entry(b).or_default(), i, -1);
        }
    }
    out
}

pub fn support_size(diffs: &BTreeMap<Char, SparseFn>) -> usize {
    diffs.values().map(BTreeMap::len).sum()
}

/// Support-pair multiplication; also returns the number of products.
pub fn sparse_convolve(a: &SparseFn, b: &SparseFn) -> (SparseFn, u64) {
    let products = a.len() * b.len();
    let mut out = SparseFn::new();
    let (Some((&a0, _)), Some((&b0, _))) = (a.first_key_value(), b.first_key_value()) else {
        return (out, 0);
    };
    let (a1, b1) = (*a.last_key_value().expect("non-empty").0, *b.last_key_value().expect("non-empty").0);
    let span = a1 + b1 - a0 - b0 + 1;
    if span <= 8 * products {
        // Dense accumulator over the output range.
        let mut acc = vec![0i64; span];
        let bs: Vec<(usize, i64)> = b.iter().map(|(&j, &v)| (j - b0, v)).collect();
        for (&i, &u) in a {
            let row = &mut acc[i - a0..];
            for &(j, v) in &bs {
                row[j] += u * v;
            }
        }
        out.extend(acc.into_iter().enumerate().filter(|&(_, v)| v != 0).map(|(i, v)| (i + a0 + b0, v)));
    } else {
        for (&i, &u) in a {
            for (&j, &v) in b {
                add_point(&mut out, i + j, u * v);
            }
        }
    }
    (out, products as u64)
}

fn ceil_sqrt_ratio(num: usize, den: usize) -> usize {
    let mut t = ((num as f64) / (den as f64)).sqrt().ceil() as usize;
    while t * t * den < num {
        t += 1;
    }
    while t > 1 && (t - 1) * (t - 1) * den >= num {
        t -= 1;
    }
    t.max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TradeoffConfig {
    /// Updates per subepoch.
    pub x: usize,
    /// Letters whose weight or pending count reaches this are recomputed in full.
    pub heavy_threshold: usize,
}

impl TradeoffConfig {
    pub fn new(n: usize, k: usize, x: usize) -> Result<Self> {
        if x == 0 || x > k {
            return Err(Error::InvalidConfig(format!("x = {x} outside [1, {k}]")));
        }
        Ok(TradeoffConfig {
            x,
            heavy_threshold: ceil_sqrt_ratio(n * k, x),
        })
    }
}

/// One buffered position; `snapshot` is its value at the last flush.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateRecord {
    pub target: Target,
    pub index: usize,
    pub snapshot: Char,
    pub current: Char,
    pub sequence: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct ResidueIndex {
    positions: Vec<usize>,
    sums: Vec<i64>,
    weighted: Vec<i64>,
}

/// What the most recent non-empty flush did.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlushStats {
    pub records: usize,
    pub total_weight: usize,
    pub heavy: usize,
    pub multiplications: u64,
}

#[derive(Clone, Debug)]
pub struct ConvState {
    start: usize,
    end: usize,
    rho: usize,
    m: usize,
    dt: BTreeMap<Char, SparseFn>,
    dp: BTreeMap<Char, SparseFn>,
    conv: BTreeMap<Char, SparseFn>,
    residues: Vec<SparseFn>,
    index: Vec<ResidueIndex>,
    records: BTreeMap<(Target, usize), UpdateRecord>,
    since_flush: usize,
    sequence: u64,
    config: TradeoffConfig,
    last_flush: FlushStats,
}

impl ConvState {
    /// Builds the state for `T' = text_window`, which starts at `start` in the
    /// text. Returns the state and the number of products computed.
    pub fn from_snapshot(text_window: &[Char], pattern: &[Char], start: usize, rho: usize, config: TradeoffConfig) -> (Self, u64) {
        assert!(rho >= 1);
        let reversed: Vec<Char> = pattern.iter().rev().copied().collect();
        let dt = letter_differences(text_window, rho);
        let dp = letter_differences(&reversed, rho);
        let mut state = ConvState {
            start,
            end: start + text_window.len(),
            rho,
            m: pattern.len(),
            dt,
            dp,
            conv: BTreeMap::new(),
            residues: vec![SparseFn::new(); rho],
            index: vec![ResidueIndex::default(); rho],
            records: BTreeMap::new(),
            since_flush: 0,
            sequence: 0,
            config,
            last_flush: FlushStats::default(),
        };
        let mut mults = 0;
        let letters: Vec<Char> = state.dt.keys().filter(|c| state.dp.contains_key(c)).copied().collect();
        for c in letters {
            let (conv, work) = sparse_convolve(&state.dt[&c], &state.dp[&c]);
            mults += work;
            state.merge_into_residues(&conv, 1);
            state.conv.insert(c, conv);
        }
        for r in 0..rho {
            state.reindex(r);
        }
        (state, mults + (text_window.len() + pattern.len()) as u64)
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn config(&self) -> TradeoffConfig {
        self.config
    }

    pub fn pattern_support(&self) -> usize {
        support_size(&self.dp)
    }

    pub fn text_support(&self) -> usize {
        support_size(&self.dt)
    }

    pub fn records(&self) -> impl Iterator<Item = &UpdateRecord> {
        self.records.values()
    }

    pub fn buffered(&self) -> usize {
        self.records.len()
    }

    pub fn last_flush(&self) -> FlushStats {
        self.last_flush
    }

    /// The stored `D` as a dense vector of length `len`.
    pub fn second_difference(&self, len: usize) -> Vec<i64> {
        let mut out = vec![0; len];
        for res in &self.residues {
            for (&i, &v) in res {
                if i < len {
                    out[i] = v;
                } else {
                    assert_eq!(v, 0, "support beyond {len}");
                }
            }
        }
        out
    }

    fn merge_into_residues(&mut self, f: &SparseFn, sign: i64) -> BTreeSet<usize> {
        let mut dirty = BTreeSet::new();
        for (&i, &v) in f {
            add_point(&mut self.residues[i % self.rho], i, sign * v);
            dirty.insert(i % self.rho);
        }
        dirty
    }

    fn reindex(&mut self, r: usize) -> u64 {
        let rho = self.rho as i64;
        let mut idx = ResidueIndex::default();
        let (mut s1, mut s2) = (0i64, 0i64);
        for (&i, &v) in &self.residues[r] {
            s1 += v;
            s2 += (i as i64 / rho) * v;
            idx.positions.push(i);
            idx.sums.push(s1);
            idx.weighted.push(s2);
        }
        let work = idx.positions.len() as u64;
        self.index[r] = idx;
        work
    }

    /// The snapshot cross-correlation `[T' ⊗ P](i)`.
    pub fn reconstruct(&self, i: usize) -> i64 {
        let idx = &self.index[i % self.rho];
        let c = idx.positions.partition_point(|&p| p <= i);
        if c == 0 {
            return 0;
        }
        (i / self.rho + 1) as i64 * idx.sums[c - 1] - idx.weighted[c - 1]
    }

    fn patch(map: &mut BTreeMap<Char, SparseFn>, c: Char, i: usize, rho: usize, sign: i64) {
        let f = map.entry(c).or_default();
        add_point(f, i, sign);
        add_point(f, i + rho, -sign);
        if f.is_empty() {
            map.remove(&c);
        }
    }

    /// Records an update already applied to the strings. Does not flush.
    fn record(&mut self, update: &Update) -> u64 {
        let idx = match update.target {
            Target::Pattern => self.m - 1 - update.index,
            Target::Text => {
                if update.index < self.start || update.index >= self.end {
                    return 0;
                }
                update.index - self.start
            }
        };
        let rho = self.rho;
        let map = match update.target {
            Target::Pattern => &mut self.dp,
            Target::Text => &mut self.dt,
        };
        Self::patch(map, update.old, idx, rho, -1);
        Self::patch(map, update.new, idx, rho, 1);
        self.sequence += 1;
        let key = (update.target, update.index);
        match self.records.get_mut(&key) {
            Some(rec) => {
                rec.current = update.new;
                rec.sequence = self.sequence;
                if rec.current == rec.snapshot {
                    self.records.remove(&key);
                }
            }
            None => {
                self.records.insert(
                    key,
                    UpdateRecord {
                        target: update.target,
                        index: update.index,
                        snapshot: update.old,
                        current: update.new,
                        sequence: self.sequence,
                    },
                );
            }
        }
        4
    }

    /// Brings convolutions, `D` and the prefix indexes up to date with the
    /// buffered updates and clears the buffer.
    pub fn flush(&mut self, meter: &Meter) {
        self.since_flush = 0;
        if self.records.is_empty() {
            return;
        }
        let rho = self.rho;
        let mut text_delta: BTreeMap<Char, SparseFn> = BTreeMap::new();
        let mut pattern_delta: BTreeMap<Char, SparseFn> = BTreeMap::new();
        let mut pending: BTreeMap<Char, usize> = BTreeMap::new();
        for rec in self.records.values() {
            let (delta, idx) = match rec.target {
                Target::Text => (&mut text_delta, rec.index - self.start),
                Target::Pattern => (&mut pattern_delta, self.m - 1 - rec.index),
            };
            Self::patch(delta, rec.snapshot, idx, rho, -1);
            Self::patch(delta, rec.current, idx, rho, 1);
            *pending.entry(rec.snapshot).or_default() += 1;
            *pending.entry(rec.current).or_default() += 1;
        }
        let t = self.config.heavy_threshold;
        let empty = SparseFn::new();
        let mut stats = FlushStats {
            records: self.records.len(),
            total_weight: self.text_support() + self.pattern_support(),
            ..FlushStats::default()
        };
        let mut dirty = BTreeSet::new();
        for (&c, &count) in &pending {
            let dt = self.dt.get(&c).unwrap_or(&empty);
            let dp = self.dp.get(&c).unwrap_or(&empty);
            let change = if dt.len() + dp.len() >= t || count >= t {
                stats.heavy += 1;
                let (fresh, work) = sparse_convolve(dt, dp);
                stats.multiplications += work;
                let mut change = fresh;
                for (&i, &v) in self.conv.get(&c).unwrap_or(&empty) {
                    add_point(&mut change, i, -v);
                }
                change
            } else {
                let d_text = text_delta.get(&c).unwrap_or(&empty);
                let d_pattern = pattern_delta.get(&c).unwrap_or(&empty);
                let (mut change, work) = sparse_convolve(d_text, dp);
                stats.multiplications += work;
                if !d_pattern.is_empty() {
                    let mut dt_old = dt.clone();
                    for (&i, &v) in d_text {
                        add_point(&mut dt_old, i, -v);
                    }
                    let (more, work) = sparse_convolve(&dt_old, d_pattern);
                    stats.multiplications += work;
                    for (i, v) in more {
                        add_point(&mut change, i, v);
                    }
                }
                change
            };
            let conv = self.conv.entry(c).or_default();
            for (&i, &v) in &change {
                add_point(conv, i, v);
            }
            if conv.is_empty() {
                self.conv.remove(&c);
            }
            dirty.extend(self.merge_into_residues(&change, 1));
        }
        let mut reindexed = 0;
        for r in dirty {
            reindexed += self.reindex(r);
        }
        self.records.clear();
        self.last_flush = stats;
        meter.record(|c| {
            c.conv_point_mults += stats.multiplications;
            c.heavy_letters += stats.heavy as u64;
            c.set_ops += reindexed;
        });
    }

    fn query(&self, pattern: &[Char], text: &[Char], i: usize, meter: &Meter) -> Option<usize> {
        let m = self.m;
        if i < self.start || i + m > self.end {
            return None;
        }
        let mut d = m as i64 - self.reconstruct(i - self.start + m - 1);
        let touched: BTreeSet<usize> = self
            .records
            .keys()
            .filter_map(|&(target, idx)| match target {
                Target::Pattern => Some(idx),
                Target::Text => (idx >= i && idx < i + m).then(|| idx - i),
            })
            .collect();
        for &j in &touched {
            let (pc, tc) = (pattern[j], text[i + j]);
            let ps = self.records.get(&(Target::Pattern, j)).map_or(pc, |r| r.snapshot);
            let ts = self.records.get(&(Target::Text, i + j)).map_or(tc, |r| r.snapshot);
            d += i64::from(pc != tc) - i64::from(ps != ts);
        }
        let scanned = self.records.len() as u64;
        meter.record(|c| {
            c.prefix_accesses += 1;
            c.buffer_scans += scanned;
            c.char_comparisons += 2 * touched.len() as u64;
        });
        debug_assert!(d >= 0);
        Some(d as usize)
    }
}

#[derive(Clone, Debug)]
pub enum TradeoffMode {
    /// Alignment to distance, every `2k`-mismatch occurrence of the snapshot.
    Explicit(BTreeMap<usize, u32>),
    Conv(Box<ConvState>),
}

#[derive(Clone, Debug)]
pub struct TradeoffState {
    mode: TradeoffMode,
    updates_left: usize,
}

impl TradeoffState {
    pub fn mode(&self) -> &TradeoffMode {
        &self.mode
    }

    pub fn conv(&self) -> Option<&ConvState> {
        match &self.mode {
            TradeoffMode::Conv(c) => Some(c.as_ref()),
            TradeoffMode::Explicit(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TradeoffJob {
    next: usize,
    occ: OccurrenceSet,
    allowance: usize,
    result: Option<TradeoffMode>,
}

#[derive(Clone, Copy, Debug)]
pub struct TradeoffScheme {
    k: usize,
    config: TradeoffConfig,
}

impl TradeoffScheme {
    pub fn new(k: usize, config: TradeoffConfig) -> Self {
        TradeoffScheme { k, config }
    }

    fn finish(&self, strings: &Strings, occ: &OccurrenceSet) -> (TradeoffMode, u64) {
        let (m, n, k) = (strings.m(), strings.n(), self.k);
        if occ.len() * k <= n {
            let map: BTreeMap<usize, u32> = occ.entries().iter().copied().collect();
            let steps = map.len() as u64;
            return (TradeoffMode::Explicit(map), steps);
        }
        let positions: Vec<usize> = occ.positions().collect();
        let rho = positions.windows(2).map(|w| w[1] - w[0]).min().expect("at least two occurrences");
        assert!(rho <= k, "minimum occurrence gap {rho} exceeds k = {k}");
        let (start, end) = (positions[0], m + positions[positions.len() - 1]);
        let pattern = strings.pattern_chars();
        let window = &strings.text_chars()[start..end];
        debug_assert!(shift_mismatches(pattern, rho) <= 4 * k);
        debug_assert!(shift_mismatches(window, rho) <= 17 * k);
        let (state, steps) = ConvState::from_snapshot(window, pattern, start, rho, self.config);
        debug_assert!(state.pattern_support() <= 2 * (4 * k + rho));
        debug_assert!(state.text_support() <= 2 * (17 * k + rho));
        (TradeoffMode::Conv(Box::new(state)), steps)
    }
}

fn shift_mismatches(x: &[Char], rho: usize) -> usize {
    x.iter().zip(&x[rho.min(x.len())..]).filter(|(a, b)| a != b).count()
}

impl EpochScheme for TradeoffScheme {
    type State = TradeoffState;
    type Job = TradeoffJob;

    fn begin(&self, _strings: &Strings, allowance: usize) -> TradeoffJob {
        TradeoffJob {
            next: 0,
            occ: OccurrenceSet::new(2 * self.k),
            allowance,
            result: None,
        }
    }

    fn advance(&self, job: &mut TradeoffJob, strings: &Strings, budget: u64, meter: &Meter) -> Result<u64> {
        let (m, n) = (strings.m(), strings.n());
        let p = strings.pattern();
        let mut spent = 0;
        while job.result.is_none() && spent < budget {
            if job.next + m <= n {
                let t = strings.text_fragment(job.next, job.next + m);
                let (d, calls) = mismatches_capped(strings.engine(), p, t, 2 * self.k);
                spent += calls;
                if let Some(d) = d {
                    job.occ.push(job.next, d as u32);
                }
                job.next += 1;
            } else {
                let (mode, steps) = self.finish(strings, &job.occ);
                spent += steps;
                meter.record(|c| c.set_ops += steps);
                job.result = Some(mode);
            }
        }
        Ok(spent)
    }

    fn finished(&self, job: &TradeoffJob) -> bool {
        job.result.is_some()
    }

    fn finish_job(&self, job: TradeoffJob) -> TradeoffState {
        TradeoffState {
            mode: job.result.expect("finished job"),
            updates_left: job.allowance,
        }
    }

    fn updates_left(&self, state: &TradeoffState) -> usize {
        state.updates_left
    }

    fn apply_update(&self, state: &mut TradeoffState, strings: &Strings, update: &Update, meter: &Meter) -> Result<()> {
        if state.updates_left == 0 {
            return Err(Error::EpochExhausted);
        }
        state.updates_left -= 1;
        match &mut state.mode {
            TradeoffMode::Explicit(map) => {
                if update.old != update.new {
                    let cmp = adjust_explicit(map, strings.pattern_chars(), strings.text_chars(), update);
                    meter.record(|c| c.char_comparisons += cmp);
                }
            }
            TradeoffMode::Conv(conv) => {
                if update.old != update.new {
                    let ops = conv.record(update);
                    meter.record(|c| c.set_ops += ops);
                }
                conv.since_flush += 1;
                if conv.since_flush >= conv.config.x {
                    conv.flush(meter);
                }
            }
        }
        Ok(())
    }

    fn query(&self, state: &TradeoffState, strings: &Strings, i: usize, meter: &Meter) -> Result<Answer> {
        let d = match &state.mode {
            TradeoffMode::Explicit(map) => map.get(&i).map(|&d| d as usize),
            TradeoffMode::Conv(conv) => conv.query(strings.pattern_chars(), strings.text_chars(), i, meter),
        };
        Ok(d.map_or(Answer::Infinity, |d| Answer::capped(d, self.k)))
    }

    fn threshold(&self) -> usize {
        self.k
    }
}

fn check(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        Err(Error::BadK { k, m })
    } else {
        Ok(())
    }
}

/// Amortized trade-off structure with subepochs of `x` updates.
pub fn tradeoff(pattern: &[Char], text: &[Char], k: usize, x: usize, seed: u64) -> Result<Amortized<TradeoffScheme>> {
    check(k, pattern.len())?;
    let config = TradeoffConfig::new(text.len(), k, x)?;
    Amortized::new(TradeoffScheme::new(k, config), pattern, text, seed, k)
}

pub fn tradeoff_deamortized(pattern: &[Char], text: &[Char], k: usize, x: usize, seed: u64) -> Result<Deamortized<TradeoffScheme>> {
    check(k, pattern.len())?;
    let config = TradeoffConfig::new(text.len(), k, x)?;
    Deamortized::new(TradeoffScheme::new(k, config), pattern, text, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::types::DynamicKMismatch;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bytes(s: &str) -> Vec<Char> {
        s.bytes().map(Char::from).collect()
    }

    fn config() -> TradeoffConfig {
        TradeoffConfig {
            x: 1,
            heavy_threshold: 1,
        }
    }

    #[test]
    fn sparse_convolution_matches_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for spread in [4usize, 64, 100_000] {
            for _ in 0..30 {
                let mut pick = || -> SparseFn {
                    let mut f = SparseFn::new();
                    for _ in 0..rng.gen_range(0..12) {
                        add_point(&mut f, rng.gen_range(0..spread), rng.gen_range(-3..=3));
                    }
                    f
                };
                let (a, b) = (pick(), pick());
                let mut expected = SparseFn::new();
                for (&i, &u) in &a {
                    for (&j, &v) in &b {
                        add_point(&mut expected, i + j, u * v);
                    }
                }
                let (got, mults) = sparse_convolve(&a, &b);
                assert_eq!(got, expected);
                assert_eq!(mults, (a.len() * b.len()) as u64);
            }
        }
    }

    #[test]
    fn heavy_threshold_is_integer_ceiling() {
        assert_eq!(TradeoffConfig::new(8, 2, 1).unwrap().heavy_threshold, 4);
        assert_eq!(TradeoffConfig::new(10, 2, 1).unwrap().heavy_threshold, 5);
        assert_eq!(TradeoffConfig::new(8192, 1024, 1024).unwrap().heavy_threshold, 91);
        assert!(TradeoffConfig::new(8, 2, 3).is_err());
        assert!(TradeoffConfig::new(8, 2, 0).is_err());
    }

    #[test]
    fn hand_expanded_reconstruction() {
        let (s, _) = ConvState::from_snapshot(&bytes("aa"), &bytes("a"), 0, 1, config());
        assert_eq!(s.second_difference(4), vec![1, -1, -1, 1]);
        assert_eq!(s.reconstruct(1), 1);
        let naive = oracle::cross_corr_naive(&bytes("aa"), &bytes("a"));
        for (i, &v) in naive.iter().enumerate() {
            assert_eq!(s.reconstruct(i), v);
        }
    }

    #[test]
    fn dense_periodic_reconstruction() {
        let p: Vec<Char> = bytes("ab").repeat(1024);
        let t: Vec<Char> = bytes("ab").repeat(2048);
        let mut s = tradeoff(&p, &t, 64, 8, 0).unwrap();
        let conv = s.state().conv().expect("dense occurrences");
        assert_eq!(conv.rho(), 2);
        let window = &t[conv.start()..conv.end()];
        let naive = oracle::cross_corr_naive(window, &p);
        for (i, &v) in naive.iter().enumerate() {
            assert_eq!(conv.reconstruct(i), v, "index {i}");
        }
        assert_eq!(s.query(0).unwrap(), Answer::Distance(0));
        assert_eq!(s.query(1).unwrap(), Answer::Infinity);
    }

    #[test]
    fn disjoint_alphabets_reconstruct_zero() {
        let (s, _) = ConvState::from_snapshot(&[0, 1, 0, 1], &[2, 3], 0, 2, config());
        for i in 0..6 {
            assert_eq!(s.reconstruct(i), 0);
        }
    }

    #[test]
    fn random_snapshots_match_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let m = rng.gen_range(1..40);
            let n = rng.gen_range(m..=2 * m);
            let rho = rng.gen_range(1..=16);
            let p: Vec<Char> = (0..m).map(|_| rng.gen_range(0..3)).collect();
            let t: Vec<Char> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let (s, _) = ConvState::from_snapshot(&t, &p, 0, rho, config());
            let naive = oracle::cross_corr_naive(&t, &p);
            for (i, &v) in naive.iter().enumerate() {
                assert_eq!(s.reconstruct(i), v);
            }
            let d = oracle::second_difference_naive(&t, &p, rho);
            assert_eq!(s.second_difference(d.len()), d);
        }
    }

    #[test]
    fn support_sizes_match_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let len = rng.gen_range(1..60);
            let rho = rng.gen_range(1..10);
            let x: Vec<Char> = (0..len).map(|_| rng.gen_range(0..4)).collect();
            assert_eq!(support_size(&letter_differences(&x, rho)), oracle::difference_support_naive(&x, rho));
        }
    }

    fn periodic(rng: &mut ChaCha8Rng, q: &[Char], len: usize, errors: usize, sigma: u32) -> Vec<Char> {
        let mut s: Vec<Char> = q.iter().copied().cycle().take(len).collect();
        for _ in 0..errors {
            let i = rng.gen_range(0..len);
            s[i] = rng.gen_range(0..sigma);
        }
        s
    }

    fn run_lockstep(k: usize, x: usize, rng: &mut ChaCha8Rng, ops: usize) {
        let q = [0, 1, 2, 1];
        let m = 64;
        let mut p = periodic(rng, &q, m, 2, 3);
        let mut t = periodic(rng, &q, 2 * m, 2, 3);
        let mut s = tradeoff(&p, &t, k, x, 7).unwrap();
        let mut saw_conv = false;
        for _ in 0..ops {
            saw_conv |= s.state().conv().is_some();
            if rng.gen_bool(0.5) {
                let pattern = rng.gen_bool(0.4);
                let len = if pattern { p.len() } else { t.len() };
                let i = rng.gen_range(0..len);
                let c = if rng.gen_bool(0.5) { q[i % 4] } else { rng.gen_range(0..3) };
                s.update(if pattern { Target::Pattern } else { Target::Text }, i, c).unwrap();
                if pattern {
                    p[i] = c;
                } else {
                    t[i] = c;
                }
            } else {
                let i = rng.gen_range(0..=t.len() - m);
                let expected = Answer::capped(oracle::hd(&p, &t[i..i + m]).unwrap(), k);
                assert_eq!(s.query(i).unwrap(), expected, "k={k} x={x} i={i}");
                if let Some(conv) = s.state().conv() {
                    assert!(conv.buffered() < 2 * x.max(1));
                }
            }
        }
        assert!(saw_conv, "k={k} x={x}: workload never reached the convolution mode");
    }

    #[test]
    fn mid_subepoch_queries_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (k, x) in [(8, 1), (8, 3), (8, 8), (16, 4)] {
            run_lockstep(k, x, &mut rng, 10_000 / 4);
        }
    }

    #[test]
    fn flush_matches_fresh_build() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let q = [0, 1];
        let m = 50;
        let p = periodic(&mut rng, &q, m, 1, 2);
        let t = periodic(&mut rng, &q, 90, 1, 2);
        let mut s = tradeoff(&p, &t, 10, 5, 1).unwrap();
        let (mut pc, mut tc) = (p.clone(), t.clone());
        for step in 0..9 {
            let i = rng.gen_range(0..m);
            let c = rng.gen_range(0..3);
            if step % 2 == 0 {
                s.update(Target::Pattern, i, c).unwrap();
                pc[i] = c;
            } else {
                s.update(Target::Text, i + 20, c).unwrap();
                tc[i + 20] = c;
            }
            let conv = s.state().conv().unwrap();
            if conv.buffered() == 0 {
                let window = &tc[conv.start()..conv.end()];
                let d = oracle::second_difference_naive(window, &pc, conv.rho());
                assert_eq!(conv.second_difference(d.len()), d);
            }
        }
    }

    #[test]
    fn write_then_revert_leaves_no_record() {
        let q = [0, 1];
        let p: Vec<Char> = q.repeat(20);
        let t: Vec<Char> = q.repeat(40);
        let mut s = tradeoff(&p, &t, 8, 4, 0).unwrap();
        let before = s.state().conv().unwrap().clone();
        s.update(Target::Text, 10, 1).unwrap();
        s.update(Target::Text, 10, 0).unwrap();
        let mid = s.state().conv().unwrap();
        assert_eq!(mid.buffered(), 0);
        s.update(Target::Pattern, 3, 1).unwrap();
        s.update(Target::Pattern, 3, 1).unwrap();
        // Fourth update flushes an empty buffer.
        let after = s.state().conv().unwrap();
        assert_eq!(after.buffered(), 0);
        assert_eq!(after.dt, before.dt);
        assert_eq!(after.dp, before.dp);
        assert_eq!(after.conv, before.conv);
        assert_eq!(after.residues, before.residues);
        assert_eq!(after.index, before.index);
    }

    #[test]
    fn heavy_count_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let q = [0, 1, 2];
        let m = 90;
        let p = periodic(&mut rng, &q, m, 2, 3);
        let t = periodic(&mut rng, &q, 170, 2, 3);
        for x in [1, 4, 16] {
            let mut s = tradeoff(&p, &t, 16, x, 1).unwrap();
            for _ in 0..16 {
                let i = rng.gen_range(0..170);
                s.update(Target::Text, i, rng.gen_range(0..3)).unwrap();
                if let Some(conv) = s.state().conv() {
                    let f = conv.last_flush();
                    let t = conv.config().heavy_threshold;
                    assert!(f.heavy * t <= f.total_weight + 2 * f.records);
                }
            }
        }
    }

    #[test]
    fn outside_window_is_infinity() {
        let q = [0, 1];
        let p: Vec<Char> = q.repeat(20);
        let mut t: Vec<Char> = q.repeat(40);
        // Break the text near the right end so that late alignments are far away.
        for c in t.iter_mut().skip(60) {
            *c = 2;
        }
        let mut s = tradeoff(&p, &t, 8, 2, 0).unwrap();
        let conv = s.state().conv().unwrap().clone();
        assert!(conv.end() < t.len());
        let i = t.len() - p.len();
        s.update(Target::Text, 79, 1).unwrap();
        assert_eq!(s.query(i).unwrap(), Answer::Infinity);
        assert_eq!(
            Answer::capped(oracle::hd(&p, &t[i..]).unwrap(), 8),
            Answer::Infinity
        );
    }

    #[test]
    fn exhausted_epoch_is_an_error() {
        let scheme = TradeoffScheme::new(1, TradeoffConfig::new(3, 1, 1).unwrap());
        let mut strings = Strings::new(&[0, 1], &[0, 1, 0], 0).unwrap();
        let meter = Meter::new();
        let (mut state, _) = crate::lazy::rebuild(&scheme, &strings, 1, &meter).unwrap();
        let u = strings.apply(Target::Text, 0, 1).unwrap();
        scheme.apply_update(&mut state, &strings, &u, &meter).unwrap();
        let u = strings.apply(Target::Text, 1, 1).unwrap();
        assert_eq!(scheme.apply_update(&mut state, &strings, &u, &meter), Err(Error::EpochExhausted));
    }

    #[test]
    fn tie_goes_to_explicit() {
        // n = 8, k = 2: four occurrences give |O| k = n.
        let p = vec![0; 5];
        let t = vec![0; 8];
        let mut s = tradeoff(&p, &t, 2, 1, 0).unwrap();
        assert!(matches!(s.state().mode(), TradeoffMode::Explicit(_)));
        assert_eq!(s.query(0).unwrap(), Answer::Distance(0));
    }

    #[test]
    fn deamortized_lockstep() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let q = [0, 1, 1];
        let m = 48;
        let mut p = periodic(&mut rng, &q, m, 1, 2);
        let mut t = periodic(&mut rng, &q, 90, 1, 2);
        let k = 6;
        let mut s = tradeoff_deamortized(&p, &t, k, 2, 3).unwrap();
        for _ in 0..3000 {
            if rng.gen_bool(0.5) {
                let i = rng.gen_range(0..t.len());
                let c = if rng.gen_bool(0.6) { q[i % 3] } else { rng.gen_range(0..2) };
                s.update(Target::Text, i, c).unwrap();
                t[i] = c;
            } else if rng.gen_bool(0.3) {
                let i = rng.gen_range(0..m);
                let c = if rng.gen_bool(0.6) { q[i % 3] } else { rng.gen_range(0..2) };
                s.update(Target::Pattern, i, c).unwrap();
                p[i] = c;
            } else {
                let i = rng.gen_range(0..=t.len() - m);
                assert_eq!(s.query(i).unwrap(), Answer::capped(oracle::hd(&p, &t[i..i + m]).unwrap(), k));
            }
        }
    }
}
