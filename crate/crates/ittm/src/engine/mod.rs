//! Transfinite executor.
//!
//! Stages below `w^(D+1)` are covered by nested segments. A level-1 segment is
//! one omega-block, run explicitly until a repeating pattern fixes its limit.
//! A level-k segment runs level-(k-1) segments from successive limits until two
//! of them start from the same snapshot; the interval between them then repeats
//! forever and the limsup over it gives the level-k limit.

mod block;
mod bouncer;
mod compiled;
mod work;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::machine::{self, Diagnostic, Program, Snapshot, StepResult};
use crate::ordinal::{Ordinal, Term};
use crate::tape::{mask_or, snapshot_diff, ChangeMask, TapeRep};

pub use block::{Detection, Pattern};
use block::{Block, BlockEnd};
use compiled::Compiled;

/// Membership test for the oracle set.
pub trait Oracle {
    fn contains(&self, tape: &TapeRep) -> Result<bool, String>;
}

impl<F: Fn(&TapeRep) -> Result<bool, String>> Oracle for F {
    fn contains(&self, tape: &TapeRep) -> Result<bool, String> {
        self(tape)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budgets {
    pub max_block_steps: u64,
    pub max_limit_depth: u32,
    pub max_limit_events: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_block_steps: 100_000, max_limit_depth: 4, max_limit_events: 10_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetKind {
    BlockSteps,
    LimitDepth,
    LimitEvents,
}

impl BudgetKind {
    pub fn name(self) -> &'static str {
        match self {
            BudgetKind::BlockSteps => "block_steps",
            BudgetKind::LimitDepth => "limit_depth",
            BudgetKind::LimitEvents => "limit_events",
        }
    }
}

/// Evidence that a snapshot reproduces itself through its own limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopCertificate {
    /// 0 for a cycle of successor steps, k for a cycle of `w^k`-long intervals.
    pub level: u32,
    /// Input the run started from; the snapshot must be the one reached at `start_stage`.
    pub input: TapeRep,
    pub start_stage: Ordinal,
    pub end_stage: Ordinal,
    pub snapshot: Snapshot,
    pub interval_masks: Vec<ChangeMask>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Outcome {
    Halted { stage: Ordinal, output: TapeRep },
    Diverges { certificate: LoopCertificate },
    #[serde(rename = "budget")]
    BudgetExceeded { which: BudgetKind, stage: Ordinal },
}

impl Outcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid program: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("input tape count does not match program arity")]
    Arity,
    #[error("program entered `query` but no oracle was supplied")]
    NoOracle,
    #[error("oracle failed: {0}")]
    Oracle(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Successor,
    BlockLimit,
    LevelLimit,
    Halt,
    Loop,
    Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum Verbosity {
    /// Tape digests only.
    #[default]
    Quiet,
    /// Full tapes.
    Full,
    /// Full tapes plus every explored successor stage.
    Detailed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub stage: Ordinal,
    pub kind: EventKind,
    pub snapshot: Snapshot,
    pub detect: Option<Detection>,
    /// Segment level of a level limit or of a loop certificate.
    pub level: Option<u32>,
    pub which: Option<BudgetKind>,
}

#[derive(Serialize)]
struct TapesJson<'a> {
    #[serde(rename = "in")]
    input: &'a TapeRep,
    scr: &'a TapeRep,
    out: &'a TapeRep,
    #[serde(skip_serializing_if = "Option::is_none")]
    orc: Option<&'a TapeRep>,
}

#[derive(Serialize)]
struct EventJson<'a> {
    stage: &'a Ordinal,
    kind: EventKind,
    state: &'a str,
    head: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    tapes: Option<TapesJson<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detect: Option<&'a Detection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    which: Option<BudgetKind>,
}

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl TraceEvent {
    /// One JSON line; tapes are replaced by a digest unless `full`.
    pub fn to_json(&self, full: bool) -> String {
        let s = &self.snapshot;
        let tapes = TapesJson { input: &s.input, scr: &s.scratch, out: &s.output, orc: s.oracle.as_ref() };
        let (tapes, digest) = if full {
            (Some(tapes), None)
        } else {
            let text = serde_json::to_string(&tapes).expect("tapes serialize");
            (None, Some(format!("{:016x}", fnv1a(text.as_bytes()))))
        };
        let e = EventJson {
            stage: &self.stage,
            kind: self.kind,
            state: &s.state,
            head: s.head,
            tapes,
            digest,
            detect: self.detect.as_ref(),
            level: self.level,
            which: self.which,
        };
        serde_json::to_string(&e).expect("event serializes")
    }
}

enum Seg {
    Halted { stage: Ordinal, snapshot: Snapshot },
    /// The limit snapshot at the segment's end and the cells that differed
    /// from the segment's start at some stage inside it.
    Limit { snapshot: Snapshot, mask: Vec<ChangeMask>, detect: Option<Detection> },
    Diverges(LoopCertificate),
    Budget { which: BudgetKind, stage: Ordinal, snapshot: Snapshot },
}

struct Runner<'a> {
    c: Compiled,
    budgets: Budgets,
    oracle: Option<&'a dyn Oracle>,
    events: Option<Vec<TraceEvent>>,
    detailed: bool,
    limit_events: u64,
    input: TapeRep,
}

fn event(stage: Ordinal, kind: EventKind, snapshot: Snapshot) -> TraceEvent {
    TraceEvent { stage, kind, snapshot, detect: None, level: None, which: None }
}

fn tapes_of(s: &Snapshot) -> Vec<TapeRep> {
    s.tapes().into_iter().cloned().collect()
}

fn or_masks(a: &[ChangeMask], b: &[ChangeMask]) -> Vec<ChangeMask> {
    a.iter().zip(b).map(|(x, y)| mask_or(x, y)).collect()
}

fn diff_masks(a: &Snapshot, b: &Snapshot) -> Vec<ChangeMask> {
    a.tapes().iter().zip(b.tapes()).map(|(x, y)| snapshot_diff(x, y)).collect()
}

fn zero_masks(n: usize) -> Vec<ChangeMask> {
    vec![TapeRep::zeros(); n]
}

/// `w^k * m`.
fn omega_times(k: u32, m: u64) -> Ordinal {
    if m == 0 {
        return Ordinal::zero();
    }
    Ordinal::from_terms(vec![Term { exp: Ordinal::nat(k as u64), coeff: m }]).expect("single term")
}

impl Runner<'_> {
    fn push(&mut self, e: TraceEvent) {
        if let Some(ev) = self.events.as_mut() {
            ev.push(e);
        }
    }

    fn block(&mut self, x: Snapshot, base: &Ordinal) -> Result<Seg, EngineError> {
        let b = Block::new(&self.c, &x, self.oracle);
        let mut pending: Option<TraceEvent> = None;
        let record = self.detailed && self.events.is_some();
        let mut successors = Vec::new();
        let mut on_step = |b: &Block<'_>| {
            if record {
                let e = event(base.add_nat(b.t), EventKind::Successor, b.snapshot());
                if let Some(p) = pending.replace(e) {
                    successors.push(p);
                }
            }
        };
        let end = b.run(self.budgets.max_block_steps, &mut on_step)?;
        let _ = &mut on_step;
        let limit_stage = base.add(&Ordinal::omega());
        let flush = |this: &mut Self, successors: Vec<TraceEvent>, pending: Option<TraceEvent>| {
            for e in successors.into_iter().chain(pending) {
                this.push(e);
            }
        };
        Ok(match end {
            BlockEnd::Halted { offset, snapshot } => {
                flush(self, successors, None);
                Seg::Halted { stage: base.add_nat(offset), snapshot }
            }
            BlockEnd::Budget { steps, snapshot } => {
                flush(self, successors, None);
                Seg::Budget { which: BudgetKind::BlockSteps, stage: base.add_nat(steps), snapshot }
            }
            BlockEnd::Limit { snapshot, mask, detail } => {
                flush(self, successors, pending);
                Seg::Limit { snapshot, mask, detect: Some(detail) }
            }
            BlockEnd::Diverges { t1, t2, snapshot, masks } => {
                flush(self, successors, pending);
                let mut e = event(limit_stage, EventKind::Loop, snapshot.clone());
                e.level = Some(0);
                self.push(e);
                Seg::Diverges(LoopCertificate {
                    level: 0,
                    input: self.input.clone(),
                    start_stage: base.add_nat(t1),
                    end_stage: base.add_nat(t2),
                    snapshot,
                    interval_masks: masks,
                })
            }
        })
    }

    /// Runs from `x` at stage `base` up to stage `base + w^k`.
    fn segment(&mut self, k: u32, x: Snapshot, base: &Ordinal) -> Result<Seg, EngineError> {
        if k == 1 {
            return self.block(x, base);
        }
        let n = x.tapes().len();
        let step = Ordinal::omega_pow_nat(k as u64 - 1);
        let mut seen: HashMap<Snapshot, usize> = HashMap::new();
        // Entry i starts at base + w^(k-1)*i; masks[i] covers entry i-1 up to entry i.
        let mut entries: Vec<Snapshot> = vec![x.clone()];
        let mut masks: Vec<Vec<ChangeMask>> = vec![zero_masks(n)];
        let mut total = zero_masks(n);
        seen.insert(x, 0);
        loop {
            let i = entries.len() - 1;
            let start = base.add(&omega_times(k - 1, i as u64));
            let cur = entries[i].clone();
            let (snapshot, mask, detect) = match self.segment(k - 1, cur.clone(), &start)? {
                Seg::Limit { snapshot, mask, detect } => (snapshot, mask, detect),
                other => return Ok(other),
            };
            let stage = start.add(&step);
            self.limit_events += 1;
            if self.limit_events > self.budgets.max_limit_events {
                return Ok(Seg::Budget { which: BudgetKind::LimitEvents, stage, snapshot });
            }
            let mut e = event(stage.clone(), if k == 2 { EventKind::BlockLimit } else { EventKind::LevelLimit }, snapshot.clone());
            e.detect = detect;
            if k > 2 {
                e.level = Some(k - 1);
            }
            self.push(e);

            let m = or_masks(&mask, &diff_masks(&cur, &snapshot));
            total = or_masks(&total, &m);
            if let Some(&j) = seen.get(&snapshot) {
                let cyc = masks[j + 1..].iter().fold(m.clone(), |acc, x| or_masks(&acc, x));
                let first = &entries[j];
                let lim = machine::limit_snapshot(&tapes_of(first), &cyc);
                if &lim == first {
                    let mut e = event(base.add(&Ordinal::omega_pow_nat(k as u64)), EventKind::Loop, lim.clone());
                    e.level = Some(k - 1);
                    self.push(e);
                    return Ok(Seg::Diverges(LoopCertificate {
                        level: k - 1,
                        input: self.input.clone(),
                        start_stage: base.add(&omega_times(k - 1, j as u64)),
                        end_stage: stage,
                        snapshot: lim,
                        interval_masks: cyc,
                    }));
                }
                return Ok(Seg::Limit { snapshot: lim, mask: total, detect: None });
            }
            seen.insert(snapshot.clone(), entries.len());
            entries.push(snapshot);
            masks.push(m);
        }
    }

    fn top(&mut self) -> Result<Outcome, EngineError> {
        let x = Snapshot::initial(self.input.clone(), self.c.arity == 4);
        let depth = self.budgets.max_limit_depth.max(1);
        Ok(match self.segment(depth + 1, x, &Ordinal::zero())? {
            Seg::Halted { stage, snapshot } => {
                self.push(event(stage.clone(), EventKind::Halt, snapshot.clone()));
                Outcome::Halted { stage, output: snapshot.output }
            }
            Seg::Diverges(certificate) => Outcome::Diverges { certificate },
            Seg::Budget { which, stage, snapshot } => self.budget(which, stage, snapshot),
            Seg::Limit { snapshot, .. } => {
                self.budget(BudgetKind::LimitDepth, Ordinal::omega_pow_nat(depth as u64 + 1), snapshot)
            }
        })
    }

    fn budget(&mut self, which: BudgetKind, stage: Ordinal, snapshot: Snapshot) -> Outcome {
        let mut e = event(stage.clone(), EventKind::Budget, snapshot);
        e.which = Some(which);
        self.push(e);
        Outcome::BudgetExceeded { which, stage }
    }
}

fn prepare(p: &Program) -> Result<Compiled, EngineError> {
    let d = p.validate();
    if !d.is_empty() {
        return Err(EngineError::Invalid(d));
    }
    Ok(Compiled::new(p))
}

/// Runs `p` on `input` through transfinite stages.
pub fn run(p: &Program, input: &TapeRep, budgets: &Budgets, oracle: Option<&dyn Oracle>) -> Result<Outcome, EngineError> {
    let mut r = Runner {
        c: prepare(p)?,
        budgets: *budgets,
        oracle,
        events: None,
        detailed: false,
        limit_events: 0,
        input: input.clone(),
    };
    r.top()
}

/// Like [`run`], also returning the trace events.
pub fn trace(
    p: &Program,
    input: &TapeRep,
    budgets: &Budgets,
    verbosity: Verbosity,
    oracle: Option<&dyn Oracle>,
) -> Result<(Outcome, Vec<TraceEvent>), EngineError> {
    let mut r = Runner {
        c: prepare(p)?,
        budgets: *budgets,
        oracle,
        events: Some(Vec::new()),
        detailed: verbosity >= Verbosity::Detailed,
        limit_events: 0,
        input: input.clone(),
    };
    let out = r.top()?;
    Ok((out, r.events.unwrap_or_default()))
}

/// Result of one omega-block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockResult {
    /// The transition fired at this offset entered `halt`.
    Halted { offset: u64, snapshot: Snapshot },
    /// The snapshot at the end of the block and the cells that changed inside it.
    Limit { snapshot: Snapshot, masks: Vec<ChangeMask>, detection: Detection },
    /// The block start repeats at offsets `t1 < t2` and the limit reproduces it.
    Diverges { t1: u64, t2: u64, snapshot: Snapshot, masks: Vec<ChangeMask> },
    Budget { steps: u64 },
}

/// Runs the omega-block starting at `start` (a stage-0 or limit snapshot).
pub fn block_advance(
    p: &Program,
    start: &Snapshot,
    max_steps: u64,
    oracle: Option<&dyn Oracle>,
) -> Result<BlockResult, EngineError> {
    let c = prepare(p)?;
    if start.tapes().len() != c.tapes() || c.id(&start.state).is_none() {
        return Err(EngineError::Arity);
    }
    let b = Block::new(&c, start, oracle);
    Ok(match b.run(max_steps, &mut |_| {})? {
        BlockEnd::Halted { offset, snapshot } => BlockResult::Halted { offset, snapshot },
        BlockEnd::Limit { snapshot, mask, detail } => BlockResult::Limit { snapshot, masks: mask, detection: detail },
        BlockEnd::Diverges { t1, t2, snapshot, masks } => BlockResult::Diverges { t1, t2, snapshot, masks },
        BlockEnd::Budget { steps, .. } => BlockResult::Budget { steps },
    })
}

/// Checks a certificate by replaying its interval from its snapshot.
pub fn verify_certificate(p: &Program, c: &LoopCertificate) -> bool {
    verify_certificate_with(p, c, &Budgets::default())
}

pub fn verify_certificate_with(p: &Program, cert: &LoopCertificate, budgets: &Budgets) -> bool {
    if !p.validate().is_empty() || p.uses_oracle() {
        return false;
    }
    let s = &cert.snapshot;
    let n = s.tapes().len();
    if n != p.arity() as usize || cert.interval_masks.len() != n || !p.is_declared(&s.state) {
        return false;
    }
    let Ok(len) = cert.start_stage.left_subtract(&cert.end_stage) else { return false };
    let m = match len.terms() {
        [t] if t.exp == Ordinal::nat(cert.level as u64) && t.coeff >= 1 => t.coeff,
        _ => return false,
    };
    let mut r = Runner {
        c: Compiled::new(p),
        budgets: Budgets { max_limit_events: u64::MAX, ..*budgets },
        oracle: None,
        events: None,
        detailed: false,
        limit_events: 0,
        input: cert.input.clone(),
    };
    if r.reach(p, &cert.start_stage).as_ref() != Some(s) {
        return false;
    }
    let masks = if cert.level == 0 {
        match replay_steps(p, s, m) {
            Some(masks) => masks,
            None => return false,
        }
    } else {
        let mut cur = s.clone();
        let mut stage = cert.start_stage.clone();
        let mut acc = zero_masks(n);
        for _ in 0..m {
            let Ok(Seg::Limit { snapshot, mask, .. }) = r.segment(cert.level, cur.clone(), &stage) else {
                return false;
            };
            acc = or_masks(&acc, &or_masks(&mask, &diff_masks(&cur, &snapshot)));
            stage = stage.add(&Ordinal::omega_pow_nat(cert.level as u64));
            cur = snapshot;
        }
        if &cur != s {
            return false;
        }
        acc
    };
    masks == cert.interval_masks && &machine::limit_snapshot(&tapes_of(s), &masks) == s
}

impl Runner<'_> {
    /// The snapshot at `stage`, if the run gets there without halting.
    fn reach(&mut self, p: &Program, stage: &Ordinal) -> Option<Snapshot> {
        let mut cur = Snapshot::initial(self.input.clone(), self.c.arity == 4);
        let mut base = Ordinal::zero();
        for t in stage.terms() {
            let Some(e) = t.exp.as_nat().filter(|&e| e >= 1) else { continue };
            let e = u32::try_from(e).ok()?;
            for _ in 0..t.coeff {
                let Ok(Seg::Limit { snapshot, .. }) = self.segment(e, cur, &base) else { return None };
                cur = snapshot;
                base = base.add(&Ordinal::omega_pow_nat(e as u64));
            }
        }
        if !stage.limit_part().terms().iter().all(|t| t.exp.as_nat().is_some()) {
            return None;
        }
        for _ in 0..stage.finite_part() {
            cur = match machine::step(p, &cur).ok()? {
                StepResult::Next(n) if n.state != machine::QUERY => n,
                _ => return None,
            };
        }
        Some(cur)
    }
}

/// Replays `m` successor steps with the reference stepper; returns the
/// cells that changed if the snapshot comes back.
fn replay_steps(p: &Program, s: &Snapshot, m: u64) -> Option<Vec<ChangeMask>> {
    let mut cur = s.clone();
    let mut acc = zero_masks(s.tapes().len());
    for _ in 0..m {
        cur = match machine::step(p, &cur).ok()? {
            StepResult::Next(n) => n,
            StepResult::Halted(_) => return None,
        };
        if cur.state == machine::QUERY {
            return None;
        }
        acc = or_masks(&acc, &diff_masks(s, &cur));
    }
    (&cur == s).then_some(acc)
}
