//! One omega-block: successor steps from a block-start snapshot until the
//! machine halts or a repeating pattern determines the next limit.

use serde::Serialize;

use crate::machine::Snapshot;
use crate::tape::{ChangeMask, TapeRep};

use super::bouncer::{self, Plan};
use super::compiled::{snapshot_from, snapshot_tapes, Compiled};
use super::work::{config_hash, Work};
use super::{EngineError, Oracle};

/// Which repeating pattern determined a block limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// The configuration at `t2` equals the one at `t1`.
    Cycle,
    /// The configuration at `t2` is the one at `t1` moved right by `shift`.
    Drift,
    /// A repeated segment grows by one copy per iteration, iterations starting at `t1`, `t2`.
    Bouncer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Detection {
    pub pattern: Pattern,
    pub t1: u64,
    pub t2: u64,
    pub shift: usize,
    /// Successor steps simulated in the block.
    pub steps: u64,
}

#[derive(Clone, Debug)]
pub(crate) enum BlockEnd {
    /// The transition fired at `offset` entered `halt`.
    Halted { offset: u64, snapshot: Snapshot },
    Limit { snapshot: Snapshot, mask: Vec<ChangeMask>, detail: Detection },
    /// A stationary cycle whose limit is its own first configuration.
    Diverges { t1: u64, t2: u64, snapshot: Snapshot, masks: Vec<ChangeMask> },
    Budget { steps: u64, snapshot: Snapshot },
}

struct Checkpoint {
    t: u64,
    state: u16,
    head: usize,
    hash: u64,
    cells: Vec<u8>,
}

struct RecordCp {
    t: u64,
    state: u16,
    head: usize,
    cells: Vec<u8>,
    min_head: usize,
}

#[derive(Default)]
struct StateRecords {
    times: Vec<(u64, usize)>,
    tapes: Vec<(u64, usize, Vec<u8>)>,
    failures: u32,
    next_try: usize,
}

enum Mode {
    Search,
    Replay { t_end: u64, t1: u64, t2: u64, start: Vec<u8>, cyc: Vec<u8> },
    DriftFinish { t_end: u64, limit: Vec<TapeRep>, r: usize, d: usize, detail: Detection },
    BouncerFinish(BouncerFinish),
}

struct BouncerFinish {
    plan: Plan,
    t1: u64,
    t2: u64,
    /// Head position of the next iteration boundary.
    next_head: usize,
    boundaries_left: u32,
    seen: Option<Vec<u8>>,
    g: usize,
}

pub(crate) struct Block<'a> {
    c: &'a Compiled,
    oracle: Option<&'a dyn Oracle>,
    pub work: Work,
    pub state: u16,
    pub head: usize,
    pub t: u64,
}

impl<'a> Block<'a> {
    pub fn new(c: &'a Compiled, start: &Snapshot, oracle: Option<&'a dyn Oracle>) -> Block<'a> {
        let state = c.id(&start.state).expect("snapshot state is declared");
        let mut work = Work::new(snapshot_tapes(start));
        work.ensure(start.head + 1);
        Block { c, oracle, work, state, head: start.head, t: 0 }
    }

    pub fn snapshot(&self) -> Snapshot {
        snapshot_from(&self.c.names, self.state, self.head, self.work.tapes())
    }

    /// One successor step. Returns `true` when the transition entered `halt`.
    #[inline]
    pub fn step(&mut self) -> Result<bool, EngineError> {
        let read = self.work.cells[self.head];
        let e = self.c.entry(self.state, read);
        self.work.set(self.head, e.write);
        self.head = e.mv.apply(self.head);
        self.work.ensure(self.head + 1);
        let mut next = e.next;
        if Some(next) == self.c.query {
            let oracle = self.oracle.ok_or(EngineError::NoOracle)?;
            let tape = &self.work.tapes()[self.c.tapes() - 1];
            next = if oracle.contains(tape).map_err(EngineError::Oracle)? { self.c.yes } else { self.c.no };
        }
        self.state = next;
        self.t += 1;
        Ok(next == self.c.halt)
    }

    /// Runs the block. `on_step` sees every successor configuration at offsets >= 1.
    pub fn run(
        mut self,
        max_steps: u64,
        on_step: &mut dyn FnMut(&Block<'_>),
    ) -> Result<BlockEnd, EngineError> {
        let patterns = self.c.query.is_none();
        let mut cp = Checkpoint {
            t: 0,
            state: self.state,
            head: self.head,
            hash: config_hash(self.work.hash, self.state, self.head),
            cells: self.work.cells.clone(),
        };
        let mut next_cp = 1u64;
        let mut max_head = self.head;
        let mut records = 0u64;
        let mut rec_cp: Option<RecordCp> = None;
        let mut next_rec_cp = 1u64;
        let mut per_state: Vec<StateRecords> = (0..self.c.names.len()).map(|_| StateRecords::default()).collect();
        let mut mode = Mode::Search;

        loop {
            if self.t >= max_steps {
                return Ok(BlockEnd::Budget { steps: self.t, snapshot: self.snapshot() });
            }
            let offset = self.t;
            let head_before = self.head;
            let halted = self.step()?;
            if let Mode::Replay { start, cyc, .. } = &mut mode {
                cyc[head_before] |= self.work.cells[head_before] ^ start[head_before];
            }
            if let Mode::BouncerFinish(BouncerFinish { seen: Some(seen), .. }) = &mut mode {
                if head_before < seen.len() {
                    seen[head_before] |= self.work.cells[head_before];
                }
            }
            if halted {
                let snapshot = self.snapshot();
                return Ok(BlockEnd::Halted { offset, snapshot });
            }
            on_step(&self);

            let record = self.head > max_head;
            if record {
                max_head = self.head;
                records += 1;
            }
            if let Some(r) = rec_cp.as_mut() {
                r.min_head = r.min_head.min(self.head);
            }

            match &mut mode {
                Mode::Search => {}
                Mode::Replay { t_end, t1, t2, start, cyc } => {
                    if self.t == *t_end {
                        debug_assert!(self.work.equals_saved(start));
                        let (t1, t2) = (*t1, *t2);
                        let cyc = std::mem::take(cyc);
                        return Ok(self.finish_cycle(t1, t2, &cyc));
                    }
                    continue;
                }
                Mode::DriftFinish { t_end, .. } => {
                    if self.t == *t_end {
                        let Mode::DriftFinish { limit, r, d, mut detail, .. } = mode else { unreachable!() };
                        let prefix = self.work.changed[..r].to_vec();
                        let tail = self.work.changed[r..r + d].to_vec();
                        let mask = self.work.periodic_of(&prefix, &tail);
                        detail.steps = self.t;
                        let snapshot = snapshot_from(&self.c.names, self.c.limit, 0, limit);
                        return Ok(BlockEnd::Limit { snapshot, mask, detail });
                    }
                    continue;
                }
                Mode::BouncerFinish(bf) => {
                    if record && self.state == bf.plan.state && self.head == bf.next_head {
                        bf.next_head += bf.plan.word.len();
                        if bf.boundaries_left == 1 {
                            bf.seen = Some(self.work.cells.clone());
                        } else if bf.boundaries_left == 0 {
                            return Ok(self.finish_bouncer(bf));
                        }
                        bf.boundaries_left -= 1;
                    }
                    continue;
                }
            }

            // Stationary cycles, Brent style.
            let h = config_hash(self.work.hash, self.state, self.head);
            if self.t == next_cp {
                cp = Checkpoint { t: self.t, state: self.state, head: self.head, hash: h, cells: self.work.cells.clone() };
                next_cp *= 2;
            } else if h == cp.hash && self.state == cp.state && self.head == cp.head && self.work.equals_saved(&cp.cells)
            {
                let period = self.t - cp.t;
                let start = self.work.cells.clone();
                let cyc = vec![0u8; start.len()];
                mode = Mode::Replay { t_end: self.t + period, t1: cp.t, t2: self.t, start, cyc };
                continue;
            }

            if !(record && patterns) {
                continue;
            }

            // Rightward drift, compared at record times.
            if let Some(r) = &rec_cp {
                if r.state == self.state {
                    if let Some(m) = self.try_drift(r) {
                        mode = m;
                        continue;
                    }
                }
            }
            if records == next_rec_cp {
                rec_cp = Some(RecordCp {
                    t: self.t,
                    state: self.state,
                    head: self.head,
                    cells: self.work.cells.clone(),
                    min_head: self.head,
                });
                next_rec_cp *= 2;
            }

            // Linear bouncers.
            if let Some(bf) = self.try_bouncer(&mut per_state[self.state as usize]) {
                mode = Mode::BouncerFinish(bf);
            }
        }
    }

    fn finish_cycle(&self, t1: u64, t2: u64, cyc: &[u8]) -> BlockEnd {
        let tapes = self.work.tapes();
        let cycle_mask = self.work.masks_of(cyc);
        let limit: Vec<TapeRep> =
            tapes.iter().zip(&cycle_mask).map(|(t, m)| crate::tape::apply_limit(t, m)).collect();
        let snapshot = snapshot_from(&self.c.names, self.c.limit, 0, limit);
        let here = self.snapshot();
        if snapshot == here {
            return BlockEnd::Diverges { t1, t2, snapshot: here, masks: cycle_mask };
        }
        let mask = self.work.masks_of(&self.work.changed);
        let detail = Detection { pattern: Pattern::Cycle, t1, t2, shift: 0, steps: self.t };
        BlockEnd::Limit { snapshot, mask, detail }
    }

    fn try_drift(&self, r: &RecordCp) -> Option<Mode> {
        let d = self.head - r.head;
        let l = r.min_head;
        if d == 0 || l == 0 || !d.is_multiple_of(self.work.base_period) {
            return None;
        }
        // Cells ahead of a record head are untouched base cells and must already repeat.
        if self.head < self.work.base_prefix {
            return None;
        }
        let end = self.work.cells.len().max(r.cells.len() + d).max(self.work.base_prefix + d) + self.work.base_period;
        let near = self.head.saturating_sub(2 * d).max(l + d);
        let same = |x: usize| self.work.get(x) == self.work.get_in(&r.cells, x - d);
        if !(near..end).all(same) || !(l + d..near).all(same) {
            return None;
        }
        // Cells below l are final; from l on the limit repeats the block laid down per period.
        let cells = &self.work.cells;
        let limit = self.work.periodic_of(&cells[..l], &(l..l + d).map(|x| self.work.get(x)).collect::<Vec<_>>());
        let period = self.t - r.t;
        let rr = (self.head + 1).max(self.work.base_prefix);
        let k = ((rr + 2 * d - l) as u64).div_ceil(d as u64);
        let detail = Detection { pattern: Pattern::Drift, t1: r.t, t2: self.t, shift: d, steps: 0 };
        Some(Mode::DriftFinish { t_end: r.t + k * period, limit, r: rr, d, detail })
    }

    fn try_bouncer(&self, rec: &mut StateRecords) -> Option<BouncerFinish> {
        rec.times.push((self.t, self.head));
        if rec.times.len() > 4 {
            rec.times.remove(0);
        }
        if rec.times.len() < 4 {
            return None;
        }
        let [(t0, h0), (t1, h1), (t2, h2), (t3, h3)] = [rec.times[0], rec.times[1], rec.times[2], rec.times[3]];
        let ell = h3 - h2;
        let (g1, g2, g3) = (t1 - t0, t2 - t1, t3 - t2);
        let regular = h1 - h0 == ell && h2 - h1 == ell && g2 > g1 && g3 > g2 && g3 - g2 == g2 - g1;
        if !regular {
            rec.tapes.clear();
            return None;
        }
        rec.tapes.push((self.t, self.head, self.work.cells.clone()));
        if rec.tapes.len() > 3 {
            rec.tapes.remove(0);
        }
        if rec.tapes.len() < 3 {
            return None;
        }
        if rec.next_try > 0 {
            rec.next_try -= 1;
            return None;
        }
        let (ta, ha, ca) = &rec.tapes[0];
        let (_, _, cb) = &rec.tapes[1];
        if ell % self.work.base_period != 0 {
            return None;
        }
        let plan = bouncer::prove(self.c, &self.work, self.state, [ca, cb, &self.work.cells], *ha, ell);
        let Some(plan) = plan else {
            rec.failures += 1;
            rec.next_try = 1 << rec.failures.min(12);
            return None;
        };
        // Cells from g on are untouched so far and behave alike modulo the word length.
        let g = (self.head + 2).max(self.work.base_prefix).max(plan.a);
        let word = plan.word.len();
        let rep_end = plan.a + plan.count * word;
        let deep_after = (g + 2 * word).saturating_sub(rep_end).div_ceil(word) as u32;
        Some(BouncerFinish {
            t1: *ta,
            t2: self.t,
            next_head: self.head + word,
            boundaries_left: deep_after + 1,
            seen: None,
            g,
            plan,
        })
    }

    fn finish_bouncer(&self, bf: &BouncerFinish) -> BlockEnd {
        let seen = bf.seen.as_ref().expect("iteration recorded");
        let (a, word) = (bf.plan.a, bf.plan.word.len());
        let limit = self.work.periodic_of(&seen[..a], &seen[a..a + word]);
        let mask = self.work.periodic_of(&self.work.changed[..bf.g], &self.work.changed[bf.g..bf.g + word]);
        let snapshot = snapshot_from(&self.c.names, self.c.limit, 0, limit);
        let detail = Detection { pattern: Pattern::Bouncer, t1: bf.t1, t2: bf.t2, shift: word, steps: self.t };
        BlockEnd::Limit { snapshot, mask, detail }
    }
}
