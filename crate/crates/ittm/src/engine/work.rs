//! Explicit cells over an eventually periodic base, with change tracking.

use crate::tape::TapeRep;

use super::compiled::bit_of;

#[inline]
fn mix(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

#[inline]
fn zob(i: usize, diff: u8) -> u64 {
    if diff == 0 {
        0
    } else {
        mix((i as u64) << 4 | diff as u64)
    }
}

#[inline]
pub(crate) fn config_hash(tape_hash: u64, state: u16, head: usize) -> u64 {
    tape_hash ^ mix(0x9e37_79b9_7f4a_7c15 ^ ((state as u64) << 40) ^ head as u64)
}

#[derive(Clone, Debug)]
pub(crate) struct Work {
    pub arity: u8,
    pub base: Vec<TapeRep>,
    /// Length after which every base tape is purely periodic.
    pub base_prefix: usize,
    /// Common period of the base tails.
    pub base_period: usize,
    /// Packed base cells: `base_prefix` explicit ones, then one period.
    packed: Vec<u8>,
    pub cells: Vec<u8>,
    /// Bits that ever differed from the base value.
    pub changed: Vec<u8>,
    pub hash: u64,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Work {
    pub fn new(base: Vec<TapeRep>) -> Work {
        let arity = base.len() as u8;
        let base_prefix = base.iter().map(TapeRep::explicit_len).max().unwrap_or(0);
        let base_period = base.iter().fold(1, |acc, t| acc / gcd(acc, t.tail().len()) * t.tail().len());
        let packed = (0..base_prefix + base_period)
            .map(|i| base.iter().enumerate().fold(0, |acc, (t, tape)| acc | tape.read(i) << bit_of(arity, t)))
            .collect();
        let mut w =
            Work { arity, base, base_prefix, base_period, packed, cells: Vec::new(), changed: Vec::new(), hash: 0 };
        w.ensure(0);
        w
    }

    #[inline]
    pub fn base_cell(&self, i: usize) -> u8 {
        if i < self.base_prefix {
            self.packed[i]
        } else {
            self.packed[self.base_prefix + (i - self.base_prefix) % self.base_period]
        }
    }

    #[inline]
    pub fn ensure(&mut self, i: usize) {
        while self.cells.len() <= i {
            let v = self.base_cell(self.cells.len());
            self.cells.push(v);
            self.changed.push(0);
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        if i < self.cells.len() {
            self.cells[i]
        } else {
            self.base_cell(i)
        }
    }

    /// Writes a packed cell; returns the previous value.
    #[inline]
    pub fn set(&mut self, i: usize, v: u8) -> u8 {
        let old = self.cells[i];
        if old != v {
            let b = self.base_cell(i);
            self.hash ^= zob(i, old ^ b) ^ zob(i, v ^ b);
            self.changed[i] |= v ^ b;
            self.cells[i] = v;
        }
        old
    }

    /// Reads cell `i` of a saved cell vector, falling back to the base.
    #[inline]
    pub fn get_in(&self, saved: &[u8], i: usize) -> u8 {
        if i < saved.len() {
            saved[i]
        } else {
            self.base_cell(i)
        }
    }

    /// Same cells as a saved vector (beyond either length the base applies).
    pub fn equals_saved(&self, saved: &[u8]) -> bool {
        let n = self.cells.len().max(saved.len());
        (0..n).all(|i| self.get(i) == self.get_in(saved, i))
    }

    /// Per-tape bits of packed cells, followed by the base from `cells.len()`.
    pub fn tapes_of(&self, cells: &[u8]) -> Vec<TapeRep> {
        (0..self.arity as usize)
            .map(|t| {
                let sh = bit_of(self.arity, t);
                let bits: Vec<u8> = cells.iter().map(|c| c >> sh & 1).collect();
                TapeRep::concat(&bits, &self.base[t].suffix(cells.len()))
            })
            .collect()
    }

    pub fn tapes(&self) -> Vec<TapeRep> {
        self.tapes_of(&self.cells)
    }

    /// Per-tape masks from packed bits, zero beyond the explicit region.
    pub fn masks_of(&self, bits: &[u8]) -> Vec<TapeRep> {
        (0..self.arity as usize)
            .map(|t| {
                let sh = bit_of(self.arity, t);
                let v: Vec<u8> = bits.iter().map(|c| c >> sh & 1).collect();
                TapeRep::from_cells(&v)
            })
            .collect()
    }

    /// Per-tape tapes built from an explicit prefix and a packed periodic tail.
    pub fn periodic_of(&self, prefix: &[u8], tail: &[u8]) -> Vec<TapeRep> {
        (0..self.arity as usize)
            .map(|t| {
                let sh = bit_of(self.arity, t);
                let p: Vec<u8> = prefix.iter().map(|c| c >> sh & 1).collect();
                let q: Vec<u8> = tail.iter().map(|c| c >> sh & 1).collect();
                TapeRep::new(&p, &q)
            })
            .collect()
    }
}
