//! Dynamic strings under substitution with fragment-level primitives:
//! access, length, extract, LCP, reversed LCP and internal pattern matching.
//!
//! Each string keeps a Fenwick tree of polynomial fingerprints modulo the
//! Mersenne prime `2^61 - 1`, so a substitution costs `O(log n)` and comparing
//! two equal-length fragments costs `O(log n)`. LCP gallops over prefix
//! lengths, then binary-searches. All strings in one engine share the random
//! base, so fragments of different strings are comparable.
//!
//! Fingerprint equality can in principle collide. [`StringEngine::set_verify`]
//! turns on a mode where every LCP is re-checked by a direct scan.

use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counters::{Counters, Meter};
use crate::error::{Error, Result};

/// A character code point. Equality is plain integer equality.
pub type Char = u32;

const MOD: u64 = (1 << 61) - 1;

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let t = a as u128 * b as u128;
    let t = (t >> 61) as u64 + (t as u64 & MOD);
    if t >= MOD {
        t - MOD
    } else {
        t
    }
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let t = a + b;
    if t >= MOD {
        t - MOD
    } else {
        t
    }
}

#[inline]
fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MOD - b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DynStringId(usize);

/// Half-open window `[start, end)` of a maintained string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fragment {
    pub source: DynStringId,
    pub start: usize,
    pub end: usize,
}

impl Fragment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// The sub-fragment `self[l..r)`.
    pub fn extract(&self, l: usize, r: usize) -> Result<Fragment> {
        if l > r || r > self.len() {
            return Err(Error::IndexOutOfRange {
                index: r.max(l),
                len: self.len(),
            });
        }
        Ok(Fragment {
            source: self.source,
            start: self.start + l,
            end: self.start + r,
        })
    }

    /// Suffix starting at `l`; panics if `l > len`.
    pub(crate) fn suffix(&self, l: usize) -> Fragment {
        debug_assert!(l <= self.len());
        Fragment {
            source: self.source,
            start: self.start + l,
            end: self.end,
        }
    }
}

/// `count` terms `start, start + difference, ...`. `difference` is 0 when `count < 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ArithmeticProgression {
    pub start: usize,
    pub difference: usize,
    pub count: usize,
}

impl ArithmeticProgression {
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.count).map(move |t| self.start + t * self.difference)
    }
}

#[derive(Clone, Debug)]
struct DynString {
    chars: Vec<Char>,
    // Fenwick tree, 1-based, over (c + 1) * base^i.
    tree: Vec<u64>,
    version: u64,
}

impl DynString {
    fn prefix(&self, mut i: usize) -> u64 {
        let mut acc = 0;
        while i > 0 {
            acc = add_mod(acc, self.tree[i]);
            i &= i - 1;
        }
        acc
    }

    fn add(&mut self, i: usize, v: u64) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] = add_mod(self.tree[j], v);
            j += j & j.wrapping_neg();
        }
    }
}

#[derive(Clone, Debug)]
pub struct StringEngine {
    strings: Vec<DynString>,
    base: u64,
    powers: Vec<u64>,
    verify: bool,
    collisions: Cell<u64>,
    meter: Meter,
}

impl StringEngine {
    /// Creates an engine whose fingerprint base is drawn from `seed`.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let base = rng.gen_range((1u64 << 20)..MOD - 1);
        StringEngine {
            strings: Vec::new(),
            base,
            powers: vec![1],
            verify: false,
            collisions: Cell::new(0),
            meter: Meter::new(),
        }
    }

    /// Re-check every LCP answer with a direct scan.
    pub fn set_verify(&mut self, verify: bool) {
        self.verify = verify;
    }

    /// Number of fingerprint collisions caught in verify mode.
    pub fn collisions(&self) -> u64 {
        self.collisions.get()
    }

    pub fn counters(&self) -> Counters {
        self.meter.snapshot()
    }

    fn ensure_powers(&mut self, len: usize) {
        while self.powers.len() <= len {
            let next = mul_mod(*self.powers.last().unwrap(), self.base);
            self.powers.push(next);
        }
    }

    pub fn insert_string(&mut self, chars: &[Char]) -> DynStringId {
        self.ensure_powers(chars.len());
        // Linear-time Fenwick construction.
        let mut tree = vec![0u64; chars.len() + 1];
        for (i, &c) in chars.iter().enumerate() {
            tree[i + 1] = mul_mod(c as u64 + 1, self.powers[i]);
        }
        for j in 1..tree.len() {
            let parent = j + (j & j.wrapping_neg());
            if parent < tree.len() {
                tree[parent] = add_mod(tree[parent], tree[j]);
            }
        }
        self.strings.push(DynString {
            chars: chars.to_vec(),
            tree,
            version: 0,
        });
        DynStringId(self.strings.len() - 1)
    }

    fn string(&self, id: DynStringId) -> &DynString {
        &self.strings[id.0]
    }

    pub fn length(&self, id: DynStringId) -> usize {
        self.string(id).chars.len()
    }

    pub fn version(&self, id: DynStringId) -> u64 {
        self.string(id).version
    }

    pub fn access(&self, id: DynStringId, i: usize) -> Result<Char> {
        let s = self.string(id);
        s.chars.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            len: s.chars.len(),
        })
    }

    /// Current contents of the whole string.
    pub fn as_slice(&self, id: DynStringId) -> &[Char] {
        &self.string(id).chars
    }

    pub fn fragment_chars(&self, f: &Fragment) -> &[Char] {
        &self.string(f.source).chars[f.start..f.end]
    }

    pub fn whole(&self, id: DynStringId) -> Fragment {
        Fragment {
            source: id,
            start: 0,
            end: self.length(id),
        }
    }

    pub fn fragment(&self, id: DynStringId, start: usize, end: usize) -> Result<Fragment> {
        self.whole(id).extract(start, end)
    }

    /// Sets `s[i] := c` and returns the previous character.
    pub fn substitute(&mut self, id: DynStringId, i: usize, c: Char) -> Result<Char> {
        let s = &mut self.strings[id.0];
        let len = s.chars.len();
        let old = *s.chars.get(i).ok_or(Error::IndexOutOfRange { index: i, len })?;
        s.version += 1;
        if old != c {
            s.chars[i] = c;
            let p = self.powers[i];
            let delta = sub_mod(mul_mod(c as u64 + 1, p), mul_mod(old as u64 + 1, p));
            s.add(i, delta);
        }
        Ok(old)
    }

    #[inline]
    fn range_hash(&self, id: DynStringId, start: usize, len: usize) -> u64 {
        let s = self.string(id);
        sub_mod(s.prefix(start + len), s.prefix(start))
    }

    /// Fingerprint equality of `x[xs..xs+len)` and `y[ys..ys+len)`.
    #[inline]
    fn ranges_equal(&self, x: DynStringId, xs: usize, y: DynStringId, ys: usize, len: usize) -> bool {
        let hx = self.range_hash(x, xs, len);
        let hy = self.range_hash(y, ys, len);
        // Both hashes carry an offset factor base^start; cross-multiply to align.
        mul_mod(hx, self.powers[ys]) == mul_mod(hy, self.powers[xs])
    }

    /// Length of the longest common prefix of two fragments.
    pub fn lcp(&self, a: Fragment, b: Fragment) -> usize {
        self.meter.record(|c| c.lcp_calls += 1);
        let max = a.len().min(b.len());
        let h = self.extend(max, |h| self.ranges_equal(a.source, a.start, b.source, b.start, h), || {
            self.string(a.source).chars[a.start] == self.string(b.source).chars[b.start]
        });
        if self.verify {
            self.checked(h, self.naive_lcp(a, b))
        } else {
            h
        }
    }

    /// Length of the longest common suffix of two fragments.
    pub fn lcp_r(&self, a: Fragment, b: Fragment) -> usize {
        self.meter.record(|c| c.lcp_calls += 1);
        let max = a.len().min(b.len());
        let h = self.extend(
            max,
            |h| self.ranges_equal(a.source, a.end - h, b.source, b.end - h, h),
            || self.string(a.source).chars[a.end - 1] == self.string(b.source).chars[b.end - 1],
        );
        if self.verify {
            self.checked(h, self.naive_lcp_r(a, b))
        } else {
            h
        }
    }

    /// Largest `h <= max` with `equal(h)`, for a monotone predicate.
    /// `first` decides `equal(1)` by one direct comparison.
    fn extend(&self, max: usize, equal: impl Fn(usize) -> bool, first: impl FnOnce() -> bool) -> usize {
        if max == 0 {
            return 0;
        }
        self.meter.record(|c| c.char_comparisons += 1);
        if !first() {
            return 0;
        }
        let mut lo = 1;
        let mut step = 1;
        let mut hi = loop {
            if lo == max {
                return max;
            }
            let probe = (lo + step).min(max);
            if equal(probe) {
                lo = probe;
                step *= 2;
            } else {
                break probe;
            }
        };
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if equal(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn checked(&self, fast: usize, slow: usize) -> usize {
        if fast != slow {
            self.collisions.set(self.collisions.get() + 1);
        }
        slow
    }

    fn naive_lcp(&self, a: Fragment, b: Fragment) -> usize {
        let (x, y) = (self.fragment_chars(&a), self.fragment_chars(&b));
        let h = x.iter().zip(y).take_while(|(p, q)| p == q).count();
        self.meter.record(|c| c.char_comparisons += h as u64 + 1);
        h
    }

    fn naive_lcp_r(&self, a: Fragment, b: Fragment) -> usize {
        let (x, y) = (self.fragment_chars(&a), self.fragment_chars(&b));
        let h = x.iter().rev().zip(y.iter().rev()).take_while(|(p, q)| p == q).count();
        self.meter.record(|c| c.char_comparisons += h as u64 + 1);
        h
    }

    /// Exact occurrences of `p` in `t`, where `|t| <= 2|p|`.
    ///
    /// Occurrences of a pattern in a text at most twice as long always form
    /// one arithmetic progression; this is asserted on the scan result.
    pub fn ipm(&self, p: Fragment, t: Fragment) -> Result<ArithmeticProgression> {
        if p.is_empty() {
            return Err(Error::PreconditionViolation("IPM pattern must be non-empty".into()));
        }
        if t.len() > 2 * p.len() {
            return Err(Error::PreconditionViolation(format!(
                "IPM text length {} exceeds twice the pattern length {}",
                t.len(),
                p.len()
            )));
        }
        if t.len() < p.len() {
            return Ok(ArithmeticProgression::default());
        }
        let (pc, tc) = (self.fragment_chars(&p), self.fragment_chars(&t));
        let mut occ = Vec::new();
        let mut comparisons = 0u64;
        for i in 0..=tc.len() - pc.len() {
            let h = pc.iter().zip(&tc[i..]).take_while(|(x, y)| x == y).count();
            comparisons += h as u64 + 1;
            if h == pc.len() {
                occ.push(i);
            }
        }
        self.meter.record(|c| c.char_comparisons += comparisons);
        let progression = match occ.as_slice() {
            [] => ArithmeticProgression::default(),
            [only] => ArithmeticProgression {
                start: *only,
                difference: 0,
                count: 1,
            },
            [first, second, ..] => ArithmeticProgression {
                start: *first,
                difference: second - first,
                count: occ.len(),
            },
        };
        assert!(
            progression.iter().eq(occ.iter().copied()),
            "occurrences of a pattern in a text of at most twice its length must form a progression"
        );
        Ok(progression)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};

    fn bytes(s: &str) -> Vec<Char> {
        s.bytes().map(Char::from).collect()
    }

    fn engine_with(strs: &[&str]) -> (StringEngine, Vec<DynStringId>) {
        let mut e = StringEngine::new(7);
        let ids = strs.iter().map(|s| e.insert_string(&bytes(s))).collect();
        (e, ids)
    }

    #[test]
    fn insert_and_access() {
        let (e, ids) = engine_with(&["", "abc"]);
        assert_eq!(e.length(ids[0]), 0);
        assert_eq!(e.access(ids[1], 1).unwrap(), b'b' as Char);
        assert_eq!(e.access(ids[1], 2).unwrap(), b'c' as Char);
        assert!(matches!(e.access(ids[1], 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn large_readback() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chars: Vec<Char> = (0..10_000).map(|_| rng.gen_range(0..1000)).collect();
        let mut e = StringEngine::new(3);
        let id = e.insert_string(&chars);
        assert_eq!(e.as_slice(id), chars.as_slice());
        assert!((0..chars.len()).all(|i| e.access(id, i).unwrap() == chars[i]));
    }

    #[test]
    fn substitute_semantics() {
        let (mut e, ids) = engine_with(&["abc"]);
        let s = ids[0];
        let v0 = e.version(s);
        assert_eq!(e.substitute(s, 1, b'b' as Char).unwrap(), b'b' as Char);
        assert_eq!(e.as_slice(s), bytes("abc").as_slice());
        assert_eq!(e.version(s), v0 + 1);
        e.substitute(s, 0, b'z' as Char).unwrap();
        assert_eq!(e.as_slice(s), bytes("zbc").as_slice());
        assert_eq!(
            e.substitute(s, 3, 0),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        );
        assert_eq!(e.length(s), 3);
    }

    #[test]
    fn lcp_examples() {
        let (e, ids) = engine_with(&["abc", "abd", ""]);
        let (a, b, empty) = (e.whole(ids[0]), e.whole(ids[1]), e.whole(ids[2]));
        assert_eq!(e.lcp(a, a), 3);
        assert_eq!(e.lcp(a, b), 2);
        assert_eq!(e.lcp(empty, a), 0);
        assert_eq!(e.lcp(a, empty), 0);
    }

    #[test]
    fn lcp_r_examples() {
        let (e, ids) = engine_with(&["cba", "dba", "x", "y"]);
        let f: Vec<Fragment> = ids.iter().map(|&id| e.whole(id)).collect();
        assert_eq!(e.lcp_r(f[0], f[0]), 3);
        assert_eq!(e.lcp_r(f[0], f[1]), 2);
        assert_eq!(e.lcp_r(f[2], f[3]), 0);
    }

    #[test]
    fn ipm_examples() {
        let (e, ids) = engine_with(&["aba", "ababa", "b", "aa", "aaa"]);
        let f: Vec<Fragment> = ids.iter().map(|&id| e.whole(id)).collect();
        assert_eq!(
            e.ipm(f[0], f[1]).unwrap(),
            ArithmeticProgression { start: 0, difference: 2, count: 2 }
        );
        assert_eq!(e.ipm(f[2], f[3]).unwrap().count, 0);
        assert_eq!(
            e.ipm(f[3], f[4]).unwrap(),
            ArithmeticProgression { start: 0, difference: 1, count: 2 }
        );
        assert!(matches!(e.ipm(f[2], f[4]), Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn extract_composition() {
        let (e, ids) = engine_with(&["abcdefg"]);
        let s = e.whole(ids[0]);
        assert_eq!(
            s.extract(1, 4).unwrap().extract(0, 2).unwrap(),
            s.extract(1, 3).unwrap()
        );
        assert_eq!(s.extract(2, 5).unwrap().len(), 3);
        assert!(s.extract(3, 8).is_err());
        assert!(s.extract(4, 3).is_err());
    }

    #[test]
    fn lcp_across_updates_and_strings() {
        let (mut e, ids) = engine_with(&["aaaaaaaa", "aaaaaaab"]);
        let (x, y) = (e.whole(ids[0]), e.whole(ids[1]));
        assert_eq!(e.lcp(x, y), 7);
        e.substitute(ids[0], 7, b'b' as Char).unwrap();
        assert_eq!(e.lcp(x, y), 8);
        e.substitute(ids[1], 0, b'c' as Char).unwrap();
        assert_eq!(e.lcp(x, y), 0);
        assert_eq!(e.lcp(x.suffix(1), y.suffix(1)), 7);
    }

    fn naive_lcp(a: &[Char], b: &[Char]) -> usize {
        a.iter().zip(b).take_while(|(x, y)| x == y).count()
    }

    fn naive_occ(p: &[Char], t: &[Char]) -> Vec<usize> {
        if t.len() < p.len() {
            return vec![];
        }
        (0..=t.len() - p.len()).filter(|&i| &t[i..i + p.len()] == p).collect()
    }

    proptest! {
        #[test]
        fn lcp_matches_naive_scan(
            s in prop::collection::vec(0u32..3, 1..4096),
            ops in prop::collection::vec((any::<prop::sample::Index>(), 0u32..3), 0..32),
            probes in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..32),
        ) {
            let mut e = StringEngine::new(11);
            let id = e.insert_string(&s);
            let mut reference = s.clone();
            for (idx, c) in ops {
                let i = idx.index(reference.len());
                e.substitute(id, i, c).unwrap();
                reference[i] = c;
            }
            prop_assert_eq!(e.as_slice(id), reference.as_slice());
            let n = reference.len();
            for (x, y, l) in probes {
                let (x, y) = (x.index(n), y.index(n));
                let len = l.index(n - x.max(y) + 1);
                let a = e.fragment(id, x, x + len).unwrap();
                let b = e.fragment(id, y, n).unwrap();
                let h = e.lcp(a, b);
                prop_assert_eq!(h, naive_lcp(&reference[x..x + len], &reference[y..]));
                prop_assert!(h == a.len().min(b.len()) || reference[x + h] != reference[y + h]);
                let hr = e.lcp_r(a, b);
                let rev = reference[x..x + len].iter().rev().zip(reference[y..].iter().rev()).take_while(|(p, q)| p == q).count();
                prop_assert_eq!(hr, rev);
            }
        }

        #[test]
        fn ipm_matches_naive_and_is_progression(
            p in prop::collection::vec(0u32..2, 1..256),
            extra in prop::collection::vec(0u32..2, 0..256),
            period in 1usize..4,
        ) {
            // Bias towards many occurrences by making the text periodic-ish.
            let p: Vec<Char> = p.iter().enumerate().map(|(i, &c)| if i % 7 == 0 { c } else { (i % period) as Char }).collect();
            let mut t: Vec<Char> = (0..p.len()).map(|i| (i % period) as Char).collect();
            t.extend(extra.iter().take(p.len()));
            let mut e = StringEngine::new(5);
            let (pi, ti) = (e.insert_string(&p), e.insert_string(&t));
            let ap = e.ipm(e.whole(pi), e.whole(ti)).unwrap();
            prop_assert_eq!(ap.iter().collect::<Vec<_>>(), naive_occ(&p, &t));
        }
    }

    #[test]
    fn verify_mode_agrees() {
        let (mut e, ids) = engine_with(&["abracadabra", "abracadabrx"]);
        e.set_verify(true);
        let (x, y) = (e.whole(ids[0]), e.whole(ids[1]));
        assert_eq!(e.lcp(x, y), 10);
        assert_eq!(e.lcp_r(x.extract(0, 4).unwrap(), y.extract(7, 11).unwrap()), 0);
        assert_eq!(e.collisions(), 0);
    }
}
