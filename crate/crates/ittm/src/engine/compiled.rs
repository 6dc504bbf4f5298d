//! Dense transition table and packed-cell helpers used by the executor.

use crate::machine::{self, Move, Program, Snapshot};
use crate::tape::TapeRep;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Entry {
    pub write: u8,
    pub mv: Move,
    pub next: u16,
}

#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub names: Vec<String>,
    pub arity: u8,
    table: Vec<Entry>,
    pub limit: u16,
    pub halt: u16,
    pub query: Option<u16>,
    pub yes: u16,
    pub no: u16,
}

impl Compiled {
    /// Assumes `p.validate()` is empty.
    pub fn new(p: &Program) -> Compiled {
        let names: Vec<String> = p.states().to_vec();
        let index: std::collections::HashMap<&str, u16> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i as u16)).collect();
        let id = |s: &str| index.get(s).copied();
        let reads = 1usize << p.arity();
        let dummy = Entry { write: 0, mv: Move::S, next: 0 };
        let mut table = vec![dummy; names.len() * reads];
        for ((s, r), a) in p.entries() {
            let (Some(si), Some(ni)) = (id(s), id(&a.next)) else { continue };
            table[si as usize * reads + *r as usize] = Entry { write: a.write, mv: a.mv, next: ni };
        }
        let query = if p.uses_oracle() { id(machine::QUERY) } else { None };
        Compiled {
            arity: p.arity(),
            limit: id(machine::LIMIT).expect("limit is declared"),
            halt: id(machine::HALT).expect("halt is declared"),
            yes: id(machine::YES).unwrap_or(0),
            no: id(machine::NO).unwrap_or(0),
            query,
            table,
            names,
        }
    }

    pub fn id(&self, s: &str) -> Option<u16> {
        self.names.iter().position(|x| x == s).map(|i| i as u16)
    }

    #[inline]
    pub fn entry(&self, state: u16, read: u8) -> Entry {
        self.table[((state as usize) << self.arity) | read as usize]
    }

    pub fn tapes(&self) -> usize {
        self.arity as usize
    }
}

/// Bit position of tape `t` inside a packed cell.
#[inline]
pub(crate) fn bit_of(arity: u8, t: usize) -> u8 {
    arity - 1 - t as u8
}

pub(crate) fn snapshot_tapes(s: &Snapshot) -> Vec<TapeRep> {
    s.tapes().into_iter().cloned().collect()
}

pub(crate) fn snapshot_from(names: &[String], state: u16, head: usize, tapes: Vec<TapeRep>) -> Snapshot {
    let mut it = tapes.into_iter();
    Snapshot {
        state: names[state as usize].clone(),
        head,
        input: it.next().expect("input tape"),
        scratch: it.next().expect("scratch tape"),
        output: it.next().expect("output tape"),
        oracle: it.next(),
    }
}
