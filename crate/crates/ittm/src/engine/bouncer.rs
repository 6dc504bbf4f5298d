//! Proofs for linear bouncers: configurations `A w^n B` in a fixed state and
//! head offset into `B`, each reaching `A w^(n+1) B` in finitely many steps.
//!
//! The proof runs one iteration symbolically. The repeated segment is crossed
//! one word at a time: when a crossing of a single copy enters on one side and
//! leaves on the other in the same state, every copy is crossed the same way.

use crate::machine::Move;

use super::compiled::Compiled;
use super::work::Work;

const WORD_STEPS: u32 = 10_000;
const ITERATION_STEPS: u32 = 200_000;

#[derive(Clone, Debug)]
pub(crate) struct Plan {
    pub state: u16,
    pub word: Vec<u8>,
    /// First cell of the repeated segment.
    pub a: usize,
    /// Copies of `word` in the current configuration.
    pub count: usize,
}

/// Looks for a bouncer through three consecutive iteration starts with packed
/// cells `cells`, all in `state`, the first with its head at `h1` and each
/// further one `ell` cells to the right.
pub(crate) fn prove(c: &Compiled, work: &Work, state: u16, cells: [&[u8]; 3], h1: usize, ell: usize) -> Option<Plan> {
    let [t1, t2, t3] = cells;
    let get = |t: &[u8], i: usize| work.get_in(t, i);
    let extent = t1.len().max(t2.len()).max(t3.len()).max(work.base_prefix) + 2 * ell + work.base_period;

    let l12 = (0..extent).find(|&i| get(t1, i) != get(t2, i))?;
    let s = (0..extent).rev().find(|&p| get(t2, p + ell) != get(t1, p)).map_or(0, |p| p + 1);
    let h2 = h1 + ell;
    for q in s..=l12 {
        if q + ell > t2.len() {
            break;
        }
        let u = &t2[q..q + ell];
        let inserted = (0..q + ell).all(|p| get(t3, p) == get(t2, p))
            && (q..extent).all(|p| get(t3, p + ell) == get(t2, p));
        if !inserted {
            continue;
        }
        let mut a = q;
        while a >= ell && &t2[a - ell..a] == u {
            a -= ell;
        }
        let mut e = q + ell;
        while e + ell <= h2.min(t2.len()) && &t2[e..e + ell] == u {
            e += ell;
        }
        if h2 < e {
            continue;
        }
        let n1 = (e - a) / ell - 1;
        if iterate(c, work, state, t1, a, u, n1, h1, ell) {
            return Some(Plan { state, word: u.to_vec(), a, count: n1 + 2 });
        }
    }
    None
}

enum Cross {
    Through(Vec<u8>),
    Fail,
}

/// Crosses one copy of `word`, entering at the left end (or the right end when
/// `from_right`), and requires leaving on the opposite side in `state`.
fn cross(c: &Compiled, state: u16, word: &[u8], from_right: bool) -> Cross {
    let mut w = word.to_vec();
    let n = w.len() as isize;
    let mut pos: isize = if from_right { n - 1 } else { 0 };
    let mut st = state;
    for _ in 0..WORD_STEPS {
        if st == c.halt || Some(st) == c.query {
            return Cross::Fail;
        }
        let e = c.entry(st, w[pos as usize]);
        w[pos as usize] = e.write;
        st = e.next;
        pos += match e.mv {
            Move::L => -1,
            Move::R => 1,
            Move::S => 0,
        };
        if pos < 0 || pos >= n {
            let out_right = pos >= n;
            if out_right == from_right || st != state || st == c.halt {
                return Cross::Fail;
            }
            return Cross::Through(w);
        }
    }
    Cross::Fail
}

#[derive(Clone, Copy)]
enum Pos {
    Left(usize),
    Right(usize),
}

#[allow(clippy::too_many_arguments)]
fn iterate(c: &Compiled, work: &Work, state: u16, t1: &[u8], a: usize, w0: &[u8], n1: usize, h1: usize, ell: usize) -> bool {
    let b0 = a + n1 * ell;
    let b = |i: usize| work.get_in(t1, b0 + i);
    let mut left: Vec<u8> = (0..a).map(|i| work.get_in(t1, i)).collect();
    let mut word = w0.to_vec();
    let mut right: Vec<u8> = Vec::new();
    let start = h1 - b0;
    let goal = start + ell;
    let mut pos = Pos::Right(start);
    let mut st = state;
    let mut max_right = start;

    for _ in 0..ITERATION_STEPS {
        if st == c.halt || Some(st) == c.query {
            return false;
        }
        match pos {
            Pos::Left(i) => {
                let e = c.entry(st, left[i]);
                left[i] = e.write;
                st = e.next;
                match e.mv {
                    Move::S => {}
                    Move::L => pos = Pos::Left(i.saturating_sub(1)),
                    Move::R if i + 1 < a => pos = Pos::Left(i + 1),
                    Move::R => {
                        if st == c.halt {
                            return false;
                        }
                        match cross(c, st, &word, false) {
                            Cross::Through(w) => word = w,
                            Cross::Fail => return false,
                        }
                        pos = Pos::Right(0);
                    }
                }
            }
            Pos::Right(i) => {
                while right.len() <= i {
                    right.push(b(right.len()));
                }
                let e = c.entry(st, right[i]);
                right[i] = e.write;
                st = e.next;
                match e.mv {
                    Move::S => {}
                    Move::R => pos = Pos::Right(i + 1),
                    Move::L if i > 0 => pos = Pos::Right(i - 1),
                    Move::L => {
                        if a == 0 || st == c.halt {
                            return false;
                        }
                        match cross(c, st, &word, true) {
                            Cross::Through(w) => word = w,
                            Cross::Fail => return false,
                        }
                        pos = Pos::Left(a - 1);
                    }
                }
            }
        }
        if let Pos::Right(i) = pos {
            if i > max_right {
                max_right = i;
                if i == goal {
                    return st == state && settled(work, t1, a, w0, &left, &word, &right, b0, ell);
                }
            }
        }
    }
    false
}

/// Whether the tape equals the start with one more copy of `w0`.
#[allow(clippy::too_many_arguments)]
fn settled(work: &Work, t1: &[u8], a: usize, w0: &[u8], left: &[u8], word: &[u8], right: &[u8], b0: usize, ell: usize) -> bool {
    if word != w0 || right.len() < ell || &right[..ell] != w0 {
        return false;
    }
    if (0..a).any(|i| left[i] != work.get_in(t1, i)) {
        return false;
    }
    let b = |i: usize| work.get_in(t1, b0 + i);
    let rd = |i: usize| if i < right.len() { right[i] } else { b(i) };
    let n = right.len() + t1.len() + work.base_prefix + ell + work.base_period;
    (0..n).all(|i| rd(i + ell) == b(i))
}
