//! Ordinals below epsilon-zero in Cantor normal form.
//!
//! An [`Ordinal`] is a strictly decreasing list of `w^e * c` terms. The
//! constructor functions keep that shape, so structural equality is ordinal
//! equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// One `w^exp * coeff` summand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub exp: Ordinal,
    pub coeff: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("left_subtract: {0} exceeds {1}")]
    NotLessOrEqual(Ordinal, Ordinal),
    #[error("terms are not in Cantor normal form")]
    NotCanonical,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad ordinal literal at byte {pos}: {msg}")]
pub struct ParseOrdinalError {
    pub pos: usize,
    pub msg: String,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![Term { exp: Self::zero(), coeff: n }] }
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::nat(1))
    }

    /// `w^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal { terms: vec![Term { exp: e, coeff: 1 }] }
    }

    /// `w^k` for a natural `k`.
    pub fn omega_pow_nat(k: u64) -> Self {
        Self::omega_pow(Self::nat(k))
    }

    /// Builds from terms, rejecting anything that is not already canonical.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self, OrdinalError> {
        for (i, t) in terms.iter().enumerate() {
            if t.coeff == 0 {
                return Err(OrdinalError::NotCanonical);
            }
            if i > 0 && terms[i - 1].exp <= t.exp {
                return Err(OrdinalError::NotCanonical);
            }
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_limit(&self) -> bool {
        match self.terms.last() {
            None => false,
            Some(t) => !t.exp.is_zero(),
        }
    }

    pub fn is_successor(&self) -> bool {
        matches!(self.terms.last(), Some(t) if t.exp.is_zero())
    }

    /// The value as a natural number, if finite.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exp.is_zero() => Some(t.coeff),
            _ => None,
        }
    }

    /// Coefficient of the `w^0` term.
    pub fn finite_part(&self) -> u64 {
        match self.terms.last() {
            Some(t) if t.exp.is_zero() => t.coeff,
            _ => 0,
        }
    }

    /// The ordinal with its finite part removed.
    pub fn limit_part(&self) -> Ordinal {
        let mut terms = self.terms.clone();
        if matches!(terms.last(), Some(t) if t.exp.is_zero()) {
            terms.pop();
        }
        Ordinal { terms }
    }

    /// Exponent of the leading term; `None` for zero.
    pub fn leading_exp(&self) -> Option<&Ordinal> {
        self.terms.first().map(|t| &t.exp)
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::nat(1))
    }

    pub fn add_nat(&self, n: u64) -> Ordinal {
        self.add(&Ordinal::nat(n))
    }

    pub fn add(&self, b: &Ordinal) -> Ordinal {
        let Some(lead) = b.terms.first() else {
            return self.clone();
        };
        let mut terms = Vec::with_capacity(self.terms.len() + b.terms.len());
        let mut rest = b.terms.iter();
        for t in &self.terms {
            match t.exp.cmp(&lead.exp) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => {
                    let coeff = t.coeff.checked_add(lead.coeff).expect("ordinal coefficient overflow");
                    terms.push(Term { exp: t.exp.clone(), coeff });
                    rest.next();
                    break;
                }
                Ordering::Less => break,
            }
        }
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    pub fn mul(&self, b: &Ordinal) -> Ordinal {
        if self.is_zero() || b.is_zero() {
            return Ordinal::zero();
        }
        let lead = &self.terms[0];
        let mut acc = Ordinal::zero();
        for t in &b.terms {
            let part = if t.exp.is_zero() {
                let coeff = lead.coeff.checked_mul(t.coeff).expect("ordinal coefficient overflow");
                let mut terms = vec![Term { exp: lead.exp.clone(), coeff }];
                terms.extend(self.terms[1..].iter().cloned());
                Ordinal { terms }
            } else {
                Ordinal { terms: vec![Term { exp: lead.exp.add(&t.exp), coeff: t.coeff }] }
            };
            acc = acc.add(&part);
        }
        acc
    }

    /// The unique `g` with `self + g == b`.
    pub fn left_subtract(&self, b: &Ordinal) -> Result<Ordinal, OrdinalError> {
        if self > b {
            return Err(OrdinalError::NotLessOrEqual(self.clone(), b.clone()));
        }
        let mut i = 0;
        while i < self.terms.len() && i < b.terms.len() && self.terms[i] == b.terms[i] {
            i += 1;
        }
        if i == b.terms.len() {
            return Ok(Ordinal::zero());
        }
        if i == self.terms.len() || self.terms[i].exp < b.terms[i].exp {
            return Ok(Ordinal { terms: b.terms[i..].to_vec() });
        }
        let (ta, tb) = (&self.terms[i], &b.terms[i]);
        let mut terms = vec![Term { exp: tb.exp.clone(), coeff: tb.coeff - ta.coeff }];
        terms.extend(b.terms[i + 1..].iter().cloned());
        Ok(Ordinal { terms })
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let c = a.exp.cmp(&b.exp).then(a.coeff.cmp(&b.coeff));
            if c != Ordering::Equal {
                return c;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::nat(n)
    }
}

fn fmt_exp(e: &Ordinal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if let Some(n) = e.as_nat() {
        write!(f, "{n}")
    } else if *e == Ordinal::omega() {
        write!(f, "w")
    } else {
        write!(f, "({e})")
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if t.exp.is_zero() {
                write!(f, "{}", t.coeff)?;
                continue;
            }
            write!(f, "w")?;
            if t.exp != Ordinal::nat(1) {
                write!(f, "^")?;
                fmt_exp(&t.exp, f)?;
            }
            if t.coeff != 1 {
                write!(f, "*{}", t.coeff)?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseOrdinalError> {
        Err(ParseOrdinalError { pos: self.pos, msg: msg.into() })
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn nat(&mut self) -> Result<u64, ParseOrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return self.err("expected a natural number");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().map_err(|_| ParseOrdinalError { pos: start, msg: "number too large".into() })
    }

    fn expr(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            acc = acc.add(&self.term()?);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exp = if self.eat(b'^') { self.exponent()? } else { Ordinal::nat(1) };
                let coeff = if self.eat(b'*') { self.nat()? } else { 1 };
                if coeff == 0 {
                    return Ok(Ordinal::zero());
                }
                Ok(Ordinal { terms: vec![Term { exp, coeff }] })
            }
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::nat(self.nat()?)),
            Some(_) => self.err("expected `w` or a number"),
            None => self.err("unexpected end of input"),
        }
    }

    fn exponent(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(b'w') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::nat(self.nat()?)),
            Some(_) => self.err("expected an exponent"),
            None => self.err("unexpected end of input"),
        }
    }
}

impl FromStr for Ordinal {
    type Err = ParseOrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let v = p.expr()?;
        if p.peek().is_some() {
            return p.err("unexpected trailing input");
        }
        Ok(v)
    }
}

pub fn parse(s: &str) -> Result<Ordinal, ParseOrdinalError> {
    s.parse()
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn comparisons() {
        assert_eq!(o("0").cmp(&o("0")), Ordering::Equal);
        assert_eq!(o("w*5+3").cmp(&o("w^2")), Ordering::Less);
        assert_eq!(o("w^2+1").cmp(&o("w^2")), Ordering::Greater);
    }

    #[test]
    fn addition() {
        assert_eq!(o("1").add(&o("w")), o("w"));
        assert_eq!(o("w").add(&o("1")), o("w+1"));
        assert_eq!(o("w*2+3").add(&o("w^2+w")), o("w^2+w"));
    }

    #[test]
    fn multiplication() {
        assert_eq!(o("w").mul(&o("2")), o("w*2"));
        assert_eq!(o("2").mul(&o("w")), o("w"));
        assert_eq!(o("w+1").mul(&o("w")), o("w^2"));
        assert_eq!(o("w+1").mul(&o("2")), o("w*2+1"));
    }

    #[test]
    fn subtraction() {
        assert_eq!(o("w").left_subtract(&o("w*2")).unwrap(), o("w"));
        assert_eq!(o("3").left_subtract(&o("w")).unwrap(), o("w"));
        assert_eq!(o("w^2+1").left_subtract(&o("w^2+5")).unwrap(), o("4"));
        assert!(o("w+1").left_subtract(&o("w")).is_err());
    }

    #[test]
    fn limits() {
        assert!(o("w^2+w").is_limit());
        assert!(!o("w+1").is_limit());
        assert!(!o("0").is_limit());
    }

    #[test]
    fn literals() {
        let v = o("w^2*3+w+4");
        assert_eq!(v.to_string(), "w^2*3+w+4");
        assert_eq!(o(" 3 + w ").to_string(), "w");
        assert_eq!(o("w^w*2+w^(w+1)").to_string(), "w^(w+1)");
        assert_eq!(o("w^(w^2)").to_string(), "w^(w^2)");
        let e = "w^2*+1".parse::<Ordinal>().unwrap_err();
        assert_eq!(e.pos, 4);
        assert_eq!("w+".parse::<Ordinal>().unwrap_err().pos, 2);
        assert_eq!("w)".parse::<Ordinal>().unwrap_err().pos, 1);
    }
}
