//! Programs, snapshots, the successor step, and tape codecs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tape::{apply_limit, ChangeMask, TapeRep};

pub const START: &str = "start";
pub const LIMIT: &str = "limit";
pub const HALT: &str = "halt";
pub const QUERY: &str = "query";
pub const YES: &str = "yes";
pub const NO: &str = "no";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
    S,
}

impl Move {
    pub fn letter(self) -> char {
        match self {
            Move::L => 'L',
            Move::R => 'R',
            Move::S => 'S',
        }
    }

    /// Applies the move; a left move at cell 0 stays put.
    pub fn apply(self, head: usize) -> usize {
        match self {
            Move::L => head.saturating_sub(1),
            Move::R => head + 1,
            Move::S => head,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    /// Bits to write, packed like the read index.
    pub write: u8,
    pub mv: Move,
    pub next: String,
}

/// A transition table over named states.
///
/// Read and write tuples are packed with the input bit most significant:
/// `abc` becomes `a<<2 | b<<1 | c`. Oracle programs use four bits, the
/// oracle bit last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    states: Vec<String>,
    arity: u8,
    table: BTreeMap<(String, u8), Action>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Diagnostic {
    MissingEntry { state: String, read: String },
    UnknownState { state: String, read: String, name: String },
    HaltHasEntry { read: String },
    QueryWithoutAnswers,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::MissingEntry { state, read } => write!(f, "missing entry for ({state}, {read})"),
            Diagnostic::UnknownState { state, read, name } => {
                write!(f, "unknown state `{name}` in entry ({state}, {read})")
            }
            Diagnostic::HaltHasEntry { read } => write!(f, "halt has an outgoing entry for {read}"),
            Diagnostic::QueryWithoutAnswers => write!(f, "program uses `query` but does not declare `yes` and `no`"),
        }
    }
}

pub fn bits_string(v: u8, arity: u8) -> String {
    (0..arity).rev().map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()
}

impl Program {
    /// An empty table over the given states; reserved states are always declared.
    pub fn new(states: &[&str], arity: u8) -> Self {
        assert!(arity == 3 || arity == 4, "arity must be 3 or 4");
        let mut p = Program { states: Vec::new(), arity, table: BTreeMap::new() };
        for s in [START, LIMIT, HALT].iter().chain(states) {
            p.declare(s);
        }
        p
    }

    pub fn declare(&mut self, s: &str) {
        if !self.states.iter().any(|x| x == s) {
            self.states.push(s.to_string());
        }
    }

    pub fn set(&mut self, state: &str, read: u8, write: u8, mv: Move, next: &str) {
        let mask = (1u8 << self.arity) - 1;
        self.table.insert((state.to_string(), read & mask), Action { write: write & mask, mv, next: next.to_string() });
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn arity(&self) -> u8 {
        self.arity
    }

    pub fn get(&self, state: &str, read: u8) -> Option<&Action> {
        self.table.get(&(state.to_string(), read))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(String, u8), &Action)> {
        self.table.iter()
    }

    pub fn is_declared(&self, s: &str) -> bool {
        self.states.iter().any(|x| x == s)
    }

    pub fn uses_oracle(&self) -> bool {
        self.table.values().any(|a| a.next == QUERY)
    }

    /// One diagnostic per violated table invariant; empty for a valid program.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let reads = 1u8 << self.arity;
        let declared: std::collections::HashSet<&str> = self.states.iter().map(String::as_str).collect();
        for s in &self.states {
            if s == HALT || s == QUERY {
                continue;
            }
            for r in 0..reads {
                if !self.table.contains_key(&(s.clone(), r)) {
                    out.push(Diagnostic::MissingEntry { state: s.clone(), read: bits_string(r, self.arity) });
                }
            }
        }
        for ((s, r), a) in &self.table {
            let read = bits_string(*r, self.arity);
            if s == HALT {
                out.push(Diagnostic::HaltHasEntry { read: read.clone() });
            }
            if !declared.contains(s.as_str()) {
                out.push(Diagnostic::UnknownState { state: s.clone(), read: read.clone(), name: s.clone() });
            }
            if !declared.contains(a.next.as_str()) {
                out.push(Diagnostic::UnknownState { state: s.clone(), read, name: a.next.clone() });
            }
        }
        if self.uses_oracle() && !(self.is_declared(YES) && self.is_declared(NO)) {
            out.push(Diagnostic::QueryWithoutAnswers);
        }
        out
    }

    /// Renders the `.ittm` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("states:");
        for s in &self.states {
            out.push(' ');
            out.push_str(s);
        }
        out.push('\n');
        for s in &self.states {
            for r in 0..(1u8 << self.arity) {
                if let Some(a) = self.table.get(&(s.clone(), r)) {
                    out.push_str(&format!(
                        "{s} {} -> {} {} {}\n",
                        bits_string(r, self.arity),
                        bits_string(a.write, self.arity),
                        a.mv.letter(),
                        a.next
                    ));
                }
            }
        }
        // Entries for undeclared states still round-trip.
        for ((s, r), a) in &self.table {
            if !self.is_declared(s) {
                out.push_str(&format!(
                    "{s} {} -> {} {} {}\n",
                    bits_string(*r, self.arity),
                    bits_string(a.write, self.arity),
                    a.mv.letter(),
                    a.next
                ));
            }
        }
        out
    }

    /// Parses the `.ittm` text format.
    pub fn parse(text: &str) -> Result<Program, ProgramParseError> {
        let mut states: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        let mut arity: Option<u8> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ProgramParseError { line: line_no, msg };
            if let Some(rest) = line.strip_prefix("states:") {
                if states.is_some() {
                    return Err(err("duplicate `states:` header".into()));
                }
                states = Some(rest.split_whitespace().map(str::to_string).collect());
                continue;
            }
            if states.is_none() {
                return Err(err("expected `states:` header before entries".into()));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 6 || toks[2] != "->" {
                return Err(err("expected `state bits -> bits M next`".into()));
            }
            let n = toks[1].len() as u8;
            if !(n == 3 || n == 4) || toks[3].len() != toks[1].len() {
                return Err(err("read and write tuples must both have 3 or 4 bits".into()));
            }
            match arity {
                None => arity = Some(n),
                Some(a) if a != n => return Err(err("inconsistent tuple width".into())),
                _ => {}
            }
            let read = parse_bits(toks[1]).ok_or_else(|| err(format!("bad bits `{}`", toks[1])))?;
            let write = parse_bits(toks[3]).ok_or_else(|| err(format!("bad bits `{}`", toks[3])))?;
            let mv = match toks[4] {
                "L" => Move::L,
                "R" => Move::R,
                "S" => Move::S,
                m => return Err(err(format!("bad move `{m}`"))),
            };
            rows.push((line_no, toks[0].to_string(), read, write, mv, toks[5].to_string()));
        }
        let states = states.ok_or(ProgramParseError { line: 0, msg: "missing `states:` header".into() })?;
        let names: Vec<&str> = states.iter().map(String::as_str).collect();
        let mut p = Program::new(&names, arity.unwrap_or(3));
        for (line, s, r, w, mv, next) in rows {
            if p.table.contains_key(&(s.clone(), r)) {
                return Err(ProgramParseError { line, msg: format!("duplicate entry for ({s}, {})", bits_string(r, p.arity)) });
            }
            p.set(&s, r, w, mv, &next);
        }
        Ok(p)
    }
}

fn parse_bits(s: &str) -> Option<u8> {
    s.bytes().try_fold(0u8, |acc, c| match c {
        b'0' => Some(acc << 1),
        b'1' => Some(acc << 1 | 1),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ProgramParseError {
    pub line: usize,
    pub msg: String,
}

/// A complete machine configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pub state: String,
    pub head: usize,
    pub input: TapeRep,
    pub scratch: TapeRep,
    pub output: TapeRep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<TapeRep>,
}

impl Snapshot {
    pub fn initial(input: TapeRep, with_oracle: bool) -> Self {
        Snapshot {
            state: START.into(),
            head: 0,
            input,
            scratch: TapeRep::zeros(),
            output: TapeRep::zeros(),
            oracle: with_oracle.then(TapeRep::zeros),
        }
    }

    pub fn tapes(&self) -> Vec<&TapeRep> {
        let mut v = vec![&self.input, &self.scratch, &self.output];
        if let Some(o) = &self.oracle {
            v.push(o);
        }
        v
    }

    /// Packed read tuple at the head.
    pub fn read(&self) -> u8 {
        let h = self.head;
        let mut r = self.input.read(h) << 2 | self.scratch.read(h) << 1 | self.output.read(h);
        if let Some(o) = &self.oracle {
            r = r << 1 | o.read(h);
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Next(Snapshot),
    /// The transition entered `halt`; the carried snapshot has its writes applied.
    Halted(Snapshot),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("snapshot is already halted")]
    AlreadyHalted,
    #[error("no entry for ({0}, {1})")]
    Missing(String, String),
    #[error("snapshot has {0} tapes but program arity is {1}")]
    Arity(usize, u8),
}

/// One successor step. A transition into `query` is returned as-is; the
/// engine resolves it against an oracle.
pub fn step(p: &Program, s: &Snapshot) -> Result<StepResult, StepError> {
    if s.state == HALT {
        return Err(StepError::AlreadyHalted);
    }
    let width = if s.oracle.is_some() { 4 } else { 3 };
    if width != p.arity() as usize {
        return Err(StepError::Arity(width, p.arity()));
    }
    let r = s.read();
    let a = p.get(&s.state, r).ok_or_else(|| StepError::Missing(s.state.clone(), bits_string(r, p.arity())))?;
    let mut w = a.write;
    let h = s.head;
    let mut n = s.clone();
    if let Some(o) = &s.oracle {
        n.oracle = Some(o.write(h, w & 1));
        w >>= 1;
    }
    n.input = s.input.write(h, w >> 2 & 1);
    n.scratch = s.scratch.write(h, w >> 1 & 1);
    n.output = s.output.write(h, w & 1);
    n.head = a.mv.apply(h);
    n.state = a.next.clone();
    Ok(if a.next == HALT { StepResult::Halted(n) } else { StepResult::Next(n) })
}

/// The limit configuration: state `limit`, head 0, limsup applied per tape.
pub fn limit_snapshot(boundaries: &[TapeRep], masks: &[ChangeMask]) -> Snapshot {
    assert!(boundaries.len() == masks.len() && (boundaries.len() == 3 || boundaries.len() == 4));
    let t: Vec<TapeRep> = boundaries.iter().zip(masks).map(|(b, m)| apply_limit(b, m)).collect();
    Snapshot {
        state: LIMIT.into(),
        head: 0,
        input: t[0].clone(),
        scratch: t[1].clone(),
        output: t[2].clone(),
        oracle: t.get(3).cloned(),
    }
}

/// `n` as `1^n` followed by zeros.
pub fn nat_encode(n: usize) -> TapeRep {
    TapeRep::from_cells(&vec![1; n])
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tape {0} is not a numeral")]
pub struct NotNumeral(pub TapeRep);

pub fn nat_decode(t: &TapeRep) -> Result<usize, NotNumeral> {
    let p = t.prefix();
    if t.tail() == [0] && p.iter().all(|&b| b == 1) {
        Ok(p.len())
    } else {
        Err(NotNumeral(t.clone()))
    }
}

/// Cantor pairing `(i+j)(i+j+1)/2 + i`.
pub fn pair(i: u64, j: u64) -> u64 {
    let s = i + j;
    s * (s + 1) / 2 + i
}

pub fn unpair(n: u64) -> (u64, u64) {
    let mut s = (((8 * n + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    while (s + 1) * (s + 2) / 2 <= n {
        s += 1;
    }
    while s * (s + 1) / 2 > n {
        s -= 1;
    }
    let i = n - s * (s + 1) / 2;
    (i, s - i)
}

/// Bit `pair(i, j)` is set iff `(i, j)` is in the relation.
pub fn rel_encode(r: &BTreeSet<(u64, u64)>) -> TapeRep {
    let Some(max) = r.iter().map(|&(i, j)| pair(i, j)).max() else {
        return TapeRep::zeros();
    };
    let mut cells = vec![0u8; max as usize + 1];
    for &(i, j) in r {
        cells[pair(i, j) as usize] = 1;
    }
    TapeRep::from_cells(&cells)
}

/// All pairs with both coordinates below `bound`.
pub fn rel_decode(t: &TapeRep, bound: u64) -> BTreeSet<(u64, u64)> {
    let mut out = BTreeSet::new();
    for i in 0..bound {
        for j in 0..bound {
            if t.read(pair(i, j) as usize) == 1 {
                out.insert((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halt_at_once() -> Program {
        let mut p = Program::new(&[], 3);
        for s in [START, LIMIT] {
            for r in 0..8 {
                p.set(s, r, r, Move::S, HALT);
            }
        }
        p
    }

    #[test]
    fn immediate_halt_keeps_tapes() {
        let p = halt_at_once();
        let s = Snapshot::initial(TapeRep::zeros(), false);
        match step(&p, &s).unwrap() {
            StepResult::Halted(n) => {
                assert_eq!(n.scratch, TapeRep::zeros());
                assert_eq!(n.state, HALT);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn right_mover_writes_scratch() {
        let mut p = Program::new(&["q"], 3);
        for s in [START, LIMIT, "q"] {
            for r in 0..8 {
                p.set(s, r, r | 0b010, Move::R, "q");
            }
        }
        let mut s = Snapshot::initial(TapeRep::zeros(), false);
        s.head = 3;
        let StepResult::Next(n) = step(&p, &s).unwrap() else { panic!() };
        assert_eq!(n.head, 4);
        assert_eq!(n.scratch.read(3), 1);
        assert_eq!(n.scratch.count_ones_upto(100), 1);
    }

    #[test]
    fn left_edge_stays() {
        assert_eq!(Move::L.apply(0), 0);
        assert_eq!(Move::L.apply(5), 4);
    }

    #[test]
    fn validation() {
        assert!(halt_at_once().validate().is_empty());
        let mut p = halt_at_once();
        p.table.remove(&(START.to_string(), 7));
        assert_eq!(p.validate(), vec![Diagnostic::MissingEntry { state: START.into(), read: "111".into() }]);
        let mut p = halt_at_once();
        p.set(START, 0, 0, Move::S, "q9");
        assert_eq!(
            p.validate(),
            vec![Diagnostic::UnknownState { state: START.into(), read: "000".into(), name: "q9".into() }]
        );
    }

    #[test]
    fn text_round_trip() {
        let p = halt_at_once();
        let q = Program::parse(&p.to_text()).unwrap();
        assert_eq!(p, q);
        let e = Program::parse("states: a\n# c\nstart 000 -> 000 X halt\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn limit_snapshots() {
        let z = TapeRep::zeros();
        let b = vec![z.clone(), "1;0".parse().unwrap(), z.clone()];
        let s = limit_snapshot(&b, &[z.clone(), z.clone(), z.clone()]);
        assert_eq!((s.state.as_str(), s.head), (LIMIT, 0));
        assert_eq!(s.scratch, b[1]);
        let s = limit_snapshot(&[z.clone(), z.clone(), z.clone()], &[TapeRep::ones(), "1;0".parse().unwrap(), z.clone()]);
        assert_eq!(s.input, TapeRep::ones());
        assert_eq!(s.scratch.to_string(), "1;0");
    }

    #[test]
    fn codecs() {
        assert_eq!(nat_encode(0).to_string(), ";0");
        assert_eq!(nat_encode(2).to_string(), "11;0");
        assert_eq!(nat_decode(&"111;0".parse().unwrap()).unwrap(), 3);
        assert!(nat_decode(&"101;0".parse().unwrap()).is_err());
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 2);
        assert_eq!(pair(0, 1), 1);
        assert_eq!(rel_encode(&BTreeSet::new()).to_string(), ";0");
        assert_eq!(rel_encode(&[(0, 1)].into_iter().collect()).to_string(), "01;0");
    }
}
