#![allow(dead_code)]

pub mod cnf;

use ittm::machine::{Move, Program, Snapshot, HALT, LIMIT, QUERY, START};
use rand::Rng;

/// Random 3-tape program over `n` user states plus `start` and `limit`.
pub fn random_program(rng: &mut impl Rng, n: usize) -> Program {
    let users: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let names: Vec<&str> = users.iter().map(String::as_str).collect();
    let mut p = Program::new(&names, 3);
    let mut targets: Vec<&str> = names.clone();
    targets.push(START);
    targets.push(HALT);
    let halt_weight = 0.05;
    for s in [START, LIMIT].iter().copied().chain(names.iter().copied()) {
        for r in 0..8u8 {
            let mv = [Move::L, Move::R, Move::S][rng.gen_range(0..3)];
            let next = if rng.gen_bool(halt_weight) { HALT } else { targets[rng.gen_range(0..targets.len() - 1)] };
            p.set(s, r, rng.gen_range(0..8), mv, next);
        }
    }
    p
}

/// Explicit successor steps from a snapshot with plain vectors, no engine code.
pub struct Naive<'a> {
    pub p: &'a Program,
    pub state: String,
    pub head: usize,
    pub tapes: Vec<Vec<u8>>,
    pub halted: bool,
    /// Cells 0..64 of each tape as bit masks.
    pub low: [u64; 3],
    init: Vec<ittm::TapeRep>,
}

impl<'a> Naive<'a> {
    pub fn new(p: &'a Program, s: &Snapshot, cells: usize) -> Self {
        let tapes = s.tapes().iter().map(|t| (0..cells).map(|i| t.read(i)).collect()).collect();
        let mut low = [0u64; 3];
        for (k, t) in s.tapes().iter().enumerate().take(3) {
            low[k] = (0..64).fold(0, |acc, i| acc | (t.read(i) as u64) << i);
        }
        Naive { p, state: s.state.clone(), head: s.head, tapes, halted: false, low, init: s.tapes().into_iter().cloned().collect() }
    }

    pub fn step(&mut self) {
        assert!(!self.halted && self.state != QUERY);
        let h = self.head;
        if h >= self.tapes[0].len() {
            for (t, init) in self.tapes.iter_mut().zip(&self.init) {
                let n = t.len();
                t.extend((n..h * 2 + 1).map(|i| init.read(i)));
            }
        }
        let r = self.tapes[0][h] << 2 | self.tapes[1][h] << 1 | self.tapes[2][h];
        let a = self.p.get(&self.state, r).expect("total program");
        self.tapes[0][h] = a.write >> 2 & 1;
        self.tapes[1][h] = a.write >> 1 & 1;
        self.tapes[2][h] = a.write & 1;
        if h < 64 {
            for k in 0..3 {
                let b = (a.write >> (2 - k) & 1) as u64;
                self.low[k] = self.low[k] & !(1 << h) | b << h;
            }
        }
        self.head = match a.mv {
            Move::L => h.saturating_sub(1),
            Move::R => h + 1,
            Move::S => h,
        };
        self.state = a.next.clone();
        self.halted = self.state == HALT;
    }
}

/// Limsup estimate over cells 0..64: runs `horizon` steps and takes the
/// maximum over the second half. `None` if the machine halts first.
pub fn brute_limsup(p: &Program, start: &Snapshot, horizon: u64) -> Option<[u64; 3]> {
    let mut m = Naive::new(p, start, 64.max(start.head + 1));
    let mut sup = [0u64; 3];
    for t in 0..horizon {
        m.step();
        if m.halted {
            return None;
        }
        if t >= horizon / 2 {
            for k in 0..3 {
                sup[k] |= m.low[k];
            }
        }
    }
    Some(sup)
}

/// Cells 0..64 of a tape as a bit mask.
pub fn low_bits(t: &ittm::TapeRep) -> u64 {
    (0..64).fold(0, |acc, i| acc | (t.read(i) as u64) << i)
}

/// Action `a` of the canonical alphabet over `targets`: bit 0 is the scratch
/// bit written, then the move, then the next state.
pub fn canonical_action(a: usize, targets: &[&'static str]) -> (u8, Move, &'static str) {
    let mv = [Move::L, Move::R, Move::S][a / 2 % 3];
    (a as u8 & 1, mv, targets[a / 6])
}

/// Program whose rows depend on the scratch bit only. `actions` holds two
/// entries (scratch 0, scratch 1) per user state, then two for `limit`;
/// `start` copies the first user state.
pub fn canonical_program(users: &[&'static str], actions: &[usize]) -> Program {
    let mut targets = users.to_vec();
    targets.push(HALT);
    let mut p = Program::new(users, 3);
    let rows = users.iter().chain([&LIMIT]).enumerate().flat_map(|(k, s)| {
        let mut v = vec![(*s, k)];
        if k == 0 {
            v.push((START, 0));
        }
        v
    });
    for (s, k) in rows.collect::<Vec<_>>() {
        for r in 0..8u8 {
            let scr = r >> 1 & 1;
            let (w, mv, next) = canonical_action(actions[2 * k + scr as usize], &targets);
            p.set(s, r, r & 0b101 | w << 1, mv, next);
        }
    }
    p
}
