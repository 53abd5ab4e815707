//! Epoch-based lazy rebuilding, amortized and deamortized.
//!
//! An [`EpochScheme`] describes a structure that is rebuilt from scratch by a
//! resumable [`EpochScheme::Job`] and then absorbs a bounded number of updates
//! cheaply. [`Amortized`] runs the whole rebuild on the update that opens an
//! epoch. [`Deamortized`] keeps two instances with staggered half-epochs of
//! `h = ceil(k/2)` updates: while one answers queries, the other runs its
//! rebuild in slices of a fixed step budget and then replays the buffered
//! updates two at a time.

use std::collections::VecDeque;

use crate::counters::{Counters, Meter};
use crate::engine::{Char, DynStringId, Fragment, StringEngine};
use crate::error::{Error, Result};
use crate::types::{Answer, DynamicKMismatch, Target, Update};

/// The pattern and text as two dynamic strings of one engine.
#[derive(Clone, Debug)]
pub struct Strings {
    engine: StringEngine,
    pattern: DynStringId,
    text: DynStringId,
}

impl Strings {
    pub fn new(pattern: &[Char], text: &[Char], seed: u64) -> Result<Self> {
        let m = pattern.len();
        if m == 0 || text.len() < m || text.len() > 2 * m {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= m <= n <= 2m, got m={m}, n={}",
                text.len()
            )));
        }
        let mut engine = StringEngine::new(seed);
        let pattern = engine.insert_string(pattern);
        let text = engine.insert_string(text);
        Ok(Strings { engine, pattern, text })
    }

    pub fn engine(&self) -> &StringEngine {
        &self.engine
    }

    pub fn set_verify(&mut self, verify: bool) {
        self.engine.set_verify(verify);
    }

    pub fn m(&self) -> usize {
        self.engine.length(self.pattern)
    }

    pub fn n(&self) -> usize {
        self.engine.length(self.text)
    }

    pub fn pattern(&self) -> Fragment {
        self.engine.whole(self.pattern)
    }

    pub fn text_fragment(&self, start: usize, end: usize) -> Fragment {
        self.engine.fragment(self.text, start, end).expect("fragment in range")
    }

    pub fn pattern_chars(&self) -> &[Char] {
        self.engine.as_slice(self.pattern)
    }

    pub fn text_chars(&self) -> &[Char] {
        self.engine.as_slice(self.text)
    }

    pub fn check(&self, target: Target, index: usize) -> Result<()> {
        let len = match target {
            Target::Pattern => self.m(),
            Target::Text => self.n(),
        };
        if index < len {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len })
        }
    }

    pub fn apply(&mut self, target: Target, index: usize, c: Char) -> Result<Update> {
        let id = match target {
            Target::Pattern => self.pattern,
            Target::Text => self.text,
        };
        let old = self.engine.substitute(id, index, c)?;
        Ok(Update {
            target,
            index,
            old,
            new: c,
        })
    }

    pub fn check_query(&self, i: usize) -> Result<()> {
        let (m, n) = (self.m(), self.n());
        if i + m > n {
            Err(Error::IndexOutOfRange { index: i, len: n - m + 1 })
        } else {
            Ok(())
        }
    }
}

/// A rebuild-per-epoch structure.
pub trait EpochScheme {
    type State;
    type Job;

    /// Starts a rebuild on the current strings. The resulting state accepts
    /// `allowance` updates before [`Error::EpochExhausted`].
    fn begin(&self, strings: &Strings, allowance: usize) -> Self::Job;

    /// Performs work until about `budget` steps are spent or the job is done;
    /// returns the steps spent. Always makes progress on an unfinished job.
    fn advance(&self, job: &mut Self::Job, strings: &Strings, budget: u64, meter: &Meter) -> Result<u64>;

    fn finished(&self, job: &Self::Job) -> bool;

    fn finish_job(&self, job: Self::Job) -> Self::State;

    fn updates_left(&self, state: &Self::State) -> usize;

    /// Incorporates an update that has already been applied to `strings`.
    fn apply_update(&self, state: &mut Self::State, strings: &Strings, update: &Update, meter: &Meter) -> Result<()>;

    fn query(&self, state: &Self::State, strings: &Strings, i: usize, meter: &Meter) -> Result<Answer>;

    fn threshold(&self) -> usize;
}

/// Runs a rebuild to completion, returning the state and the steps spent.
pub fn rebuild<S: EpochScheme>(scheme: &S, strings: &Strings, allowance: usize, meter: &Meter) -> Result<(S::State, u64)> {
    let mut job = scheme.begin(strings, allowance);
    let mut steps = 0;
    while !scheme.finished(&job) {
        steps += scheme.advance(&mut job, strings, u64::MAX, meter)?;
    }
    Ok((scheme.finish_job(job), steps))
}

/// Rebuilds on the update that opens each epoch of `epoch_len` updates.
/// `epoch_len = 1` rebuilds after every update.
pub struct Amortized<S: EpochScheme> {
    scheme: S,
    strings: Strings,
    state: S::State,
    epoch_len: usize,
    meter: Meter,
    base: Counters,
}

impl<S: EpochScheme> Amortized<S> {
    pub fn new(scheme: S, pattern: &[Char], text: &[Char], seed: u64, epoch_len: usize) -> Result<Self> {
        if epoch_len == 0 {
            return Err(Error::InvalidConfig("epoch length must be positive".into()));
        }
        let strings = Strings::new(pattern, text, seed)?;
        let meter = Meter::new();
        let (state, _) = rebuild(&scheme, &strings, epoch_len - 1, &meter)?;
        let base = meter.snapshot() + strings.engine().counters();
        Ok(Amortized {
            scheme,
            strings,
            state,
            epoch_len,
            meter,
            base,
        })
    }

    pub fn set_verify(&mut self, verify: bool) {
        self.strings.set_verify(verify);
    }

    pub fn scheme(&self) -> &S {
        &self.scheme
    }

    pub fn state(&self) -> &S::State {
        &self.state
    }

    pub fn strings(&self) -> &Strings {
        &self.strings
    }
}

impl<S: EpochScheme> DynamicKMismatch for Amortized<S> {
    fn pattern_len(&self) -> usize {
        self.strings.m()
    }

    fn text_len(&self) -> usize {
        self.strings.n()
    }

    fn threshold(&self) -> usize {
        self.scheme.threshold()
    }

    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()> {
        self.strings.check(target, index)?;
        let update = self.strings.apply(target, index, c)?;
        if self.scheme.updates_left(&self.state) == 0 {
            let (state, steps) = rebuild(&self.scheme, &self.strings, self.epoch_len - 1, &self.meter)?;
            self.meter.record(|c| c.rebuild_steps += steps);
            self.state = state;
            Ok(())
        } else {
            self.scheme.apply_update(&mut self.state, &self.strings, &update, &self.meter)
        }
    }

    fn query(&mut self, i: usize) -> Result<Answer> {
        self.strings.check_query(i)?;
        self.scheme.query(&self.state, &self.strings, i, &self.meter)
    }

    fn counters(&self) -> Counters {
        self.meter.snapshot() + self.strings.engine().counters() - self.base
    }
}

struct Instance<S: EpochScheme> {
    strings: Strings,
    state: Option<S::State>,
    job: Option<S::Job>,
    job_steps: u64,
    backlog: VecDeque<(Target, usize, Char)>,
}

impl<S: EpochScheme> Instance<S> {
    fn apply_live(&mut self, scheme: &S, target: Target, index: usize, c: Char, meter: &Meter) -> Result<()> {
        let update = self.strings.apply(target, index, c)?;
        let state = self.state.as_mut().expect("live instance has a state");
        scheme.apply_update(state, &self.strings, &update, meter)
    }

    /// Spends up to `budget` steps on the job; returns the steps and, if the
    /// job finished, its total cost.
    fn step_job(&mut self, scheme: &S, budget: u64, meter: &Meter) -> Result<(u64, Option<u64>)> {
        let Some(job) = self.job.as_mut() else {
            return Ok((0, None));
        };
        let steps = scheme.advance(job, &self.strings, budget, meter)?;
        self.job_steps += steps;
        if scheme.finished(job) {
            let job = self.job.take().expect("job present");
            self.state = Some(scheme.finish_job(job));
            Ok((steps, Some(self.job_steps)))
        } else {
            Ok((steps, None))
        }
    }

    fn drain(&mut self, scheme: &S, limit: usize, meter: &Meter) -> Result<()> {
        for _ in 0..limit {
            let Some((target, index, c)) = self.backlog.pop_front() else {
                break;
            };
            self.apply_live(scheme, target, index, c, meter)?;
        }
        Ok(())
    }
}

/// Two staggered instances; the rebuild of the inactive one is sliced across
/// the first half of its half-epoch, the second half replays its backlog at
/// double rate. Requires `k >= 2`.
pub struct Deamortized<S: EpochScheme> {
    scheme: S,
    instances: [Instance<S>; 2],
    active: usize,
    half_epoch: usize,
    updates_seen: u64,
    estimate: u64,
    budget: u64,
    meter: Meter,
    base: Counters,
}

impl<S: EpochScheme> Deamortized<S> {
    pub fn new(scheme: S, pattern: &[Char], text: &[Char], seed: u64) -> Result<Self> {
        let k = scheme.threshold();
        if k < 2 {
            return Err(Error::InvalidConfig("deamortization needs k >= 2".into()));
        }
        let half_epoch = k.div_ceil(2);
        // An instance serves queries until 2h - 1 updates after its snapshot; 2*ceil(k/2) - 1 <= k.
        let allowance = 2 * half_epoch - 1;
        let meter = Meter::new();
        let make = |seed: u64| -> Result<(Instance<S>, u64)> {
            let strings = Strings::new(pattern, text, seed)?;
            let (state, steps) = rebuild(&scheme, &strings, allowance, &meter)?;
            Ok((
                Instance {
                    strings,
                    state: Some(state),
                    job: None,
                    job_steps: 0,
                    backlog: VecDeque::new(),
                },
                steps,
            ))
        };
        let (a, estimate) = make(seed)?;
        let (b, _) = make(seed.wrapping_add(1))?;
        let instances = [a, b];
        let base = meter.snapshot() + instances[0].strings.engine().counters() + instances[1].strings.engine().counters();
        Ok(Deamortized {
            scheme,
            instances,
            active: 0,
            half_epoch,
            updates_seen: 0,
            estimate,
            budget: 0,
            meter,
            base,
        })
    }

    pub fn set_verify(&mut self, verify: bool) {
        for inst in &mut self.instances {
            inst.strings.set_verify(verify);
        }
    }

    pub fn half_epoch(&self) -> usize {
        self.half_epoch
    }

    /// Steps the inactive instance may spend per update in the current epoch.
    pub fn step_budget(&self) -> u64 {
        self.budget
    }

    pub fn active_state(&self) -> &S::State {
        self.instances[self.active].state.as_ref().expect("active instance is live")
    }

    fn catch_up(&mut self, idx: usize) -> Result<()> {
        let inst = &mut self.instances[idx];
        if inst.job.is_some() {
            let (steps, total) = inst.step_job(&self.scheme, u64::MAX, &self.meter)?;
            self.meter.record(|c| c.rebuild_steps += steps);
            if let Some(total) = total {
                self.estimate = total;
            }
        }
        let backlog = inst.backlog.len();
        inst.drain(&self.scheme, backlog, &self.meter)
    }

    fn progress(&mut self, idx: usize) -> Result<()> {
        let inst = &mut self.instances[idx];
        if inst.job.is_some() {
            let (steps, total) = inst.step_job(&self.scheme, self.budget, &self.meter)?;
            self.meter.record(|c| c.rebuild_steps += steps);
            if let Some(total) = total {
                self.estimate = total;
            }
            Ok(())
        } else {
            inst.drain(&self.scheme, 2, &self.meter)
        }
    }
}

impl<S: EpochScheme> DynamicKMismatch for Deamortized<S> {
    fn pattern_len(&self) -> usize {
        self.instances[0].strings.m()
    }

    fn text_len(&self) -> usize {
        self.instances[0].strings.n()
    }

    fn threshold(&self) -> usize {
        self.scheme.threshold()
    }

    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()> {
        self.instances[0].strings.check(target, index)?;
        let u = self.updates_seen;
        self.updates_seen += 1;
        let h = self.half_epoch as u64;
        if u.is_multiple_of(h) {
            let rebuilding = ((u / h) % 2) as usize;
            let live = 1 - rebuilding;
            self.catch_up(live)?;
            self.instances[live].apply_live(&self.scheme, target, index, c, &self.meter)?;
            self.active = live;
            let inst = &mut self.instances[rebuilding];
            debug_assert!(inst.job.is_none() && inst.backlog.is_empty());
            inst.strings.apply(target, index, c)?;
            inst.state = None;
            inst.job = Some(self.scheme.begin(&inst.strings, 2 * self.half_epoch - 1));
            inst.job_steps = 0;
            let slices = self.half_epoch.div_ceil(2) as u64;
            self.budget = self.estimate.div_ceil(slices).max(1);
            self.progress(rebuilding)
        } else {
            let live = self.active;
            self.instances[live].apply_live(&self.scheme, target, index, c, &self.meter)?;
            let rebuilding = 1 - live;
            self.instances[rebuilding].backlog.push_back((target, index, c));
            self.progress(rebuilding)
        }
    }

    fn query(&mut self, i: usize) -> Result<Answer> {
        let inst = &self.instances[self.active];
        inst.strings.check_query(i)?;
        let state = inst.state.as_ref().expect("active instance is live");
        self.scheme.query(state, &inst.strings, i, &self.meter)
    }

    fn counters(&self) -> Counters {
        self.meter.snapshot()
            + self.instances[0].strings.engine().counters()
            + self.instances[1].strings.engine().counters()
            - self.base
    }
}
