//! Seeded workload generators, including the 3SUM and OMv gadget instances.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::Char;
use crate::error::{Error, Result};
use crate::harness::{InstanceConfig, Record, StructureKind, Workload};
use crate::matcher::is_primitive;
use crate::types::{Answer, Target};

fn random_string(rng: &mut ChaCha8Rng, len: usize, sigma: u32) -> Vec<Char> {
    (0..len).map(|_| rng.gen_range(0..sigma)).collect()
}

/// Appends `ops` operations: queries with probability `query_ratio`, else a
/// uniformly random substitution in either string.
pub fn append_random_ops(w: &mut Workload, rng: &mut ChaCha8Rng, ops: usize, query_ratio: f64) {
    let (m, n, sigma) = (w.header.pattern.len(), w.header.text.len(), w.header.config.sigma);
    for _ in 0..ops {
        if rng.gen_bool(query_ratio) {
            w.records.push(Record::Query {
                index: rng.gen_range(0..=n - m),
                expected: None,
            });
        } else {
            let (target, len) = if rng.gen_bool(0.5) { (Target::Pattern, m) } else { (Target::Text, n) };
            w.records.push(Record::Update {
                target,
                index: rng.gen_range(0..len),
                char: rng.gen_range(0..sigma),
            });
        }
    }
}

/// Uniform strings and a uniform mix of operations.
pub fn gen_random(config: &InstanceConfig, ops: usize, query_ratio: f64) -> Result<Workload> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pattern = random_string(&mut rng, config.m, config.sigma);
    let text = random_string(&mut rng, config.n, config.sigma);
    let mut w = Workload::new(*config, pattern, text);
    append_random_ops(&mut w, &mut rng, ops, query_ratio.clamp(0.0, 1.0));
    Ok(w)
}

/// Like [`gen_random`] but the text is tiled from the pattern with a fraction
/// `noise` of positions resampled. The tiling is anchored at a random valid
/// alignment, so at least one alignment starts out close.
pub fn gen_similar(config: &InstanceConfig, ops: usize, query_ratio: f64, noise: f64) -> Result<Workload> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pattern = random_string(&mut rng, config.m, config.sigma);
    let anchor = rng.gen_range(0..=config.n - config.m);
    let shift = (config.m - anchor % config.m) % config.m;
    let text: Vec<Char> = (0..config.n)
        .map(|i| {
            if rng.gen_bool(noise) {
                rng.gen_range(0..config.sigma)
            } else {
                pattern[(i + shift) % config.m]
            }
        })
        .collect();
    let mut w = Workload::new(*config, pattern, text);
    append_random_ops(&mut w, &mut rng, ops, query_ratio.clamp(0.0, 1.0));
    Ok(w)
}

fn plant(rng: &mut ChaCha8Rng, s: &mut [Char], errors: usize, alphabet: u32) {
    for i in sample(rng, s.len(), errors.min(s.len())) {
        s[i] = (s[i] + rng.gen_range(1..alphabet)) % alphabet;
    }
}

/// `P = Q^copies` and `T = Q^(2 copies)`, each with `planted_errors`
/// substitutions at distinct positions. No operations are generated.
pub fn gen_periodic(q: &[Char], copies: usize, planted_errors: usize, seed: u64, k: usize) -> Result<Workload> {
    if q.is_empty() || !is_primitive(q) {
        return Err(Error::NonPrimitiveQ);
    }
    let alphabet = q.iter().copied().max().expect("non-empty") + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = q.len() * copies;
    let mut pattern: Vec<Char> = q.iter().copied().cycle().take(m).collect();
    let mut text: Vec<Char> = q.iter().copied().cycle().take(2 * m).collect();
    plant(&mut rng, &mut pattern, planted_errors, alphabet);
    plant(&mut rng, &mut text, planted_errors, alphabet);
    let config = InstanceConfig::new(2 * m, m, k, alphabet, StructureKind::Fastq).with_seed(seed);
    config.validate()?;
    Ok(Workload::new(config, pattern, text))
}

/// A 3SUM instance encoded as a workload, with what is needed to read it back.
#[derive(Clone, Debug)]
pub struct ThreeSumWorkload {
    pub workload: Workload,
    pub universe: i64,
    pub a: BTreeSet<i64>,
    pub b: BTreeSet<i64>,
    /// The value `c` asked by each query, in order.
    pub queries: Vec<i64>,
}

impl ThreeSumWorkload {
    /// Distance of the query for `c` when no triple sums to zero.
    pub fn baseline(&self, c: i64) -> usize {
        let m = self.workload.header.pattern.len() as i64;
        let lo = c + self.universe;
        let ones = self.b.iter().filter(|&&b| (lo..lo + m).contains(&(2 * self.universe - b))).count();
        self.a.len() + ones
    }

    /// The values `c` whose query answer falls below the baseline.
    pub fn drops(&self, answers: &[Answer]) -> BTreeSet<i64> {
        assert_eq!(answers.len(), self.queries.len());
        self.queries
            .iter()
            .zip(answers)
            .filter(|&(&c, &ans)| ans.distance().is_some_and(|d| (d as usize) < self.baseline(c)))
            .map(|(&c, _)| c)
            .collect()
    }
}

/// `{c ∈ C : a + b + c = 0 for some a ∈ A, b ∈ B}` by enumeration.
pub fn threesum_solutions(a: &BTreeSet<i64>, b: &BTreeSet<i64>, c: &BTreeSet<i64>) -> BTreeSet<i64> {
    c.iter().copied().filter(|&c| a.iter().any(|&a| b.contains(&(-a - c)))).collect()
}

/// Binary gadget instance: `P[a+N] = 1` for `a ∈ A`, `T[2N-b] = 1` for
/// `b ∈ B`, written as updates onto all-zero strings, then a query at `c+N`
/// for each `c ∈ C`. Uses `n = 2m` and `k = |A| + |B|` (at least 1).
pub fn gen_threesum(a: &BTreeSet<i64>, b: &BTreeSet<i64>, c: &BTreeSet<i64>, universe: i64, m: usize) -> Result<ThreeSumWorkload> {
    let needed = 2 * universe.max(0) as usize;
    if m < needed {
        return Err(Error::UniverseTooLarge { universe, needed, m });
    }
    let within = |s: &BTreeSet<i64>| s.iter().all(|&v| (-universe..universe).contains(&v));
    if !within(a) || !within(b) || !within(c) {
        return Err(Error::PreconditionViolation(format!("values must lie in [-{universe}, {universe})")));
    }
    let k = (a.len() + b.len()).max(1);
    if k > m {
        return Err(Error::BadK { k, m });
    }
    let config = InstanceConfig::new(2 * m, m, k, 2, StructureKind::Kangaroo);
    let mut w = Workload::new(config, vec![0; m], vec![0; 2 * m]);
    for &v in a {
        w.records.push(Record::Update {
            target: Target::Pattern,
            index: (v + universe) as usize,
            char: 1,
        });
    }
    for &v in b {
        w.records.push(Record::Update {
            target: Target::Text,
            index: (2 * universe - v) as usize,
            char: 1,
        });
    }
    let queries: Vec<i64> = c.iter().copied().collect();
    for &v in &queries {
        w.records.push(Record::Query {
            index: (v + universe) as usize,
            expected: None,
        });
    }
    Ok(ThreeSumWorkload {
        workload: w,
        universe,
        a: a.clone(),
        b: b.clone(),
        queries,
    })
}

/// An OMv instance: a `p x q` matrix against a sequence of vectors.
#[derive(Clone, Debug)]
pub struct OmvWorkload {
    pub workload: Workload,
    pub rows: usize,
    pub cols: usize,
    pub vectors: usize,
}

impl OmvWorkload {
    /// For every vector, the rows whose query reports distance below `2q`.
    pub fn reported_rows(&self, answers: &[Answer]) -> Vec<BTreeSet<usize>> {
        assert_eq!(answers.len(), self.rows * self.vectors);
        answers
            .chunks(self.rows)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.distance().is_some_and(|d| (d as usize) < 2 * self.cols))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }
}

/// Rows `i` with `(Mv)[i] = 1` over the Boolean semiring.
pub fn boolean_product(matrix: &[Vec<bool>], v: &[bool]) -> BTreeSet<usize> {
    matrix
        .iter()
        .enumerate()
        .filter(|(_, row)| row.iter().zip(v).any(|(&a, &b)| a && b))
        .map(|(i, _)| i)
        .collect()
}

/// Text row `i` is the gadgets `100` (`M[i][j] = 0`) or `111`; for each
/// vector the pattern is rewritten to `001` (`v[j] = 0`) or `111` and row `i`
/// is queried at `i * 3q`. Uses threshold `k`, which must be at least `2q - 1`
/// for the answers to separate the rows.
pub fn gen_omv(matrix: &[Vec<bool>], vectors: &[Vec<bool>], k: usize) -> Result<OmvWorkload> {
    let p = matrix.len();
    let q = matrix.first().map_or(0, Vec::len);
    if p == 0 || q == 0 || matrix.iter().any(|r| r.len() != q) || vectors.iter().any(|v| v.len() != q) {
        return Err(Error::PreconditionViolation("matrix and vectors must be non-empty and consistent".into()));
    }
    let m = 3 * q;
    let mut text = Vec::with_capacity(p * m);
    for row in matrix {
        for &bit in row {
            text.extend_from_slice(if bit { &[1, 1, 1] } else { &[1, 0, 0] });
        }
    }
    let config = InstanceConfig::new(p * m, m, k, 2, StructureKind::Kangaroo);
    config.validate()?;
    let mut w = Workload::new(config, vec![0; m], text);
    for v in vectors {
        for (j, &bit) in v.iter().enumerate() {
            let gadget: [Char; 3] = if bit { [1, 1, 1] } else { [0, 0, 1] };
            for (o, &c) in gadget.iter().enumerate() {
                w.records.push(Record::Update {
                    target: Target::Pattern,
                    index: 3 * j + o,
                    char: c,
                });
            }
        }
        for i in 0..p {
            w.records.push(Record::Query {
                index: i * m,
                expected: None,
            });
        }
    }
    Ok(OmvWorkload {
        workload: w,
        rows: p,
        cols: q,
        vectors: vectors.len(),
    })
}
