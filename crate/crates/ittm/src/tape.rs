//! Eventually periodic binary tapes.
//!
//! A [`TapeRep`] is a finite prefix followed by a non-empty tail repeated
//! forever. Values are always canonical: the tail has minimal period and the
//! prefix cannot be shortened by rotating a bit into the tail, so `==` is
//! equality of the infinite sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TapeRep {
    prefix: Vec<u8>,
    tail: Vec<u8>,
}

/// Cells that were non-constant over some stage interval.
pub type ChangeMask = TapeRep;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad tape literal at byte {pos}: {msg}")]
pub struct ParseTapeError {
    pub pos: usize,
    pub msg: String,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn minimal_period(t: &[u8]) -> usize {
    let n = t.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| t[i] == t[i - p]))
        .unwrap_or(n)
}

/// Canonical form of `prefix` followed by `tail` repeated. Panics on an empty tail.
pub fn canonical(prefix: &[u8], tail: &[u8]) -> TapeRep {
    assert!(!tail.is_empty(), "tape tail must be non-empty");
    let p = minimal_period(tail);
    let mut tail: Vec<u8> = tail[..p].iter().map(|&b| b & 1).collect();
    let mut prefix: Vec<u8> = prefix.iter().map(|&b| b & 1).collect();
    let k = (0..prefix.len()).take_while(|&j| prefix[prefix.len() - 1 - j] == tail[(p - 1 - j % p) % p]).count();
    prefix.truncate(prefix.len() - k);
    tail.rotate_right(k % p);
    TapeRep { prefix, tail }
}

impl Default for TapeRep {
    fn default() -> Self {
        Self::zeros()
    }
}

impl TapeRep {
    pub fn new(prefix: &[u8], tail: &[u8]) -> Self {
        canonical(prefix, tail)
    }

    pub fn zeros() -> Self {
        TapeRep { prefix: Vec::new(), tail: vec![0] }
    }

    pub fn ones() -> Self {
        TapeRep { prefix: Vec::new(), tail: vec![1] }
    }

    /// Finitely many cells followed by zeros.
    pub fn from_cells(cells: &[u8]) -> Self {
        canonical(cells, &[0])
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> &[u8] {
        &self.tail
    }

    pub fn is_zero(&self) -> bool {
        self.prefix.is_empty() && self.tail == [0]
    }

    pub fn read(&self, i: usize) -> u8 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.tail[(i - self.prefix.len()) % self.tail.len()]
        }
    }

    pub fn write(&self, i: usize, b: u8) -> TapeRep {
        if self.read(i) == b & 1 {
            return self.clone();
        }
        if i < self.prefix.len() {
            let mut prefix = self.prefix.clone();
            prefix[i] = b & 1;
            return canonical(&prefix, &self.tail);
        }
        let mut cells = self.cells(i + 1);
        cells[i] = b & 1;
        let offset = (i + 1 - self.prefix.len()) % self.tail.len();
        let mut tail = self.tail.clone();
        tail.rotate_left(offset);
        canonical(&cells, &tail)
    }

    /// The first `n` cells.
    pub fn cells(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.read(i)).collect()
    }

    /// The tape read from cell `offset` onwards.
    pub fn suffix(&self, offset: usize) -> TapeRep {
        if offset <= self.prefix.len() {
            return canonical(&self.prefix[offset..], &self.tail);
        }
        let mut tail = self.tail.clone();
        tail.rotate_left((offset - self.prefix.len()) % self.tail.len());
        canonical(&[], &tail)
    }

    /// `cells` followed by `rest`.
    pub fn concat(cells: &[u8], rest: &TapeRep) -> TapeRep {
        let mut prefix = cells.to_vec();
        prefix.extend_from_slice(&rest.prefix);
        canonical(&prefix, &rest.tail)
    }

    /// Cell-wise combination; the result has period lcm of the two tails.
    pub fn zip_with(&self, other: &TapeRep, f: impl Fn(u8, u8) -> u8) -> TapeRep {
        let n = self.prefix.len().max(other.prefix.len());
        let p = lcm(self.tail.len(), other.tail.len());
        let prefix: Vec<u8> = (0..n).map(|i| f(self.read(i), other.read(i))).collect();
        let tail: Vec<u8> = (n..n + p).map(|i| f(self.read(i), other.read(i))).collect();
        canonical(&prefix, &tail)
    }

    /// True iff `other` read at `i + d` equals `self` read at `i` for every `i`.
    pub fn matches_shift(&self, other: &TapeRep, d: usize) -> bool {
        let n = self.prefix.len().max(other.prefix.len().saturating_sub(d));
        let p = lcm(self.tail.len(), other.tail.len());
        (0..n + p).all(|i| other.read(i + d) == self.read(i))
    }

    pub fn count_ones_upto(&self, n: usize) -> usize {
        (0..n).filter(|&i| self.read(i) == 1).count()
    }

    /// Number of explicit cells after which the tape is purely periodic.
    pub fn explicit_len(&self) -> usize {
        self.prefix.len()
    }
}

pub fn mask_or(a: &ChangeMask, b: &ChangeMask) -> ChangeMask {
    a.zip_with(b, |x, y| x | y)
}

/// Cells where the two tapes differ.
pub fn snapshot_diff(a: &TapeRep, b: &TapeRep) -> ChangeMask {
    a.zip_with(b, |x, y| x ^ y)
}

/// Limsup rule: oscillating cells become 1, the rest keep their boundary value.
pub fn apply_limit(boundary: &TapeRep, nonconstant: &ChangeMask) -> TapeRep {
    boundary.zip_with(nonconstant, |x, m| x | m)
}

fn bits(s: &str, base: usize) -> Result<Vec<u8>, ParseTapeError> {
    s.bytes()
        .enumerate()
        .map(|(i, c)| match c {
            b'0' => Ok(0),
            b'1' => Ok(1),
            _ => Err(ParseTapeError { pos: base + i, msg: format!("expected a bit, found {:?}", c as char) }),
        })
        .collect()
}

impl FromStr for TapeRep {
    type Err = ParseTapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(semi) = s.find(';') else {
            return Err(ParseTapeError { pos: s.len(), msg: "expected `;` separating prefix and tail".into() });
        };
        let prefix = bits(&s[..semi], 0)?;
        let tail = bits(&s[semi + 1..], semi + 1)?;
        if tail.is_empty() {
            return Err(ParseTapeError { pos: s.len(), msg: "tail must be non-empty".into() });
        }
        Ok(canonical(&prefix, &tail))
    }
}

pub fn parse(s: &str) -> Result<TapeRep, ParseTapeError> {
    s.trim().parse()
}

impl fmt::Display for TapeRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.prefix {
            write!(f, "{b}")?;
        }
        write!(f, ";")?;
        for &b in &self.tail {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for TapeRep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TapeRep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> TapeRep {
        s.parse().unwrap()
    }

    #[test]
    fn reads() {
        assert_eq!(t("101;0").read(1), 0);
        assert_eq!(t("101;0").read(7), 0);
        assert_eq!(t(";10").read(5), 0);
        assert_eq!(t(";10").read(4), 1);
    }

    #[test]
    fn writes() {
        assert_eq!(t(";0").write(0, 1), t("1;0"));
        assert_eq!(t("1;0").write(0, 1), t("1;0"));
        assert_eq!(t(";1").write(2, 0), t("110;1"));
        assert_eq!(t(";1").write(2, 0).to_string(), "110;1");
        assert_eq!(t(";10").write(3, 1).to_string(), "1011;10");
        assert_eq!(t(";10").write(1, 1).to_string(), "11;10");
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical(&[1, 0, 1, 0], &[1, 0, 1, 0]).to_string(), ";10");
        assert_eq!(canonical(&[0, 0], &[0]).to_string(), ";0");
        // 1,0,1,1,1,... and 1,0,1,0,1,... are different sequences.
        assert_ne!(t("10;1"), t("1;01"));
        assert_eq!(t("10;10"), t("1;01"));
        assert_eq!(t("10;10").to_string(), ";10");
        assert_ne!(t("1;0"), t(";0"));
    }

    #[test]
    fn shifts() {
        assert!(t(";0").matches_shift(&t(";0"), 3));
        assert!(t("1;0").matches_shift(&t("01;0"), 1));
        assert!(t("1;0").matches_shift(&t("11;0"), 1));
        assert!(!t("1;0").matches_shift(&t("1;0"), 1));
    }

    #[test]
    fn masks() {
        assert_eq!(mask_or(&t(";0"), &t(";0")), t(";0"));
        assert_eq!(snapshot_diff(&t("1;0"), &t(";0")), t("1;0"));
        assert_eq!(mask_or(&t("1;0"), &t("01;0")), t("11;0"));
        assert_eq!(apply_limit(&t("0110;1"), &t(";0")), t("0110;1"));
        assert_eq!(apply_limit(&t(";0"), &t("1;0")), t("1;0"));
        assert_eq!(apply_limit(&t("1;0"), &t("1;0")), t("1;0"));
    }

    #[test]
    fn literal_errors() {
        assert_eq!("10".parse::<TapeRep>().unwrap_err().pos, 2);
        assert_eq!("1x;0".parse::<TapeRep>().unwrap_err().pos, 1);
        assert_eq!("1;".parse::<TapeRep>().unwrap_err().pos, 2);
        assert_eq!("1;02".parse::<TapeRep>().unwrap_err().pos, 3);
    }

    #[test]
    fn suffix_and_concat() {
        let a = t("1101;011");
        for off in 0..12 {
            let s = a.suffix(off);
            for i in 0..30 {
                assert_eq!(s.read(i), a.read(i + off));
            }
        }
        assert_eq!(TapeRep::concat(&[1, 1], &t(";0")), t("11;0"));
    }
}
