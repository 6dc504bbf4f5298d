//! Ordinals below w^8 as coefficient arrays, `c[e]` the coefficient of `w^e`.
//! Arithmetic works term by term from the textbook rules, with no shared code.

use std::cmp::Ordering;

use ittm::Ordinal;

pub const N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cnf(pub [u64; N]);

impl Cnf {
    pub fn triple(a: u64, b: u64, c: u64) -> Cnf {
        let mut x = [0; N];
        (x[2], x[1], x[0]) = (a, b, c);
        Cnf(x)
    }

    fn lead(&self) -> Option<usize> {
        (0..N).rev().find(|&e| self.0[e] > 0)
    }

    pub fn cmp(&self, o: &Cnf) -> Ordering {
        (0..N).rev().map(|e| self.0[e].cmp(&o.0[e])).find(|c| c.is_ne()).unwrap_or(Ordering::Equal)
    }

    /// Terms of `self` below the leading exponent of `o` are absorbed.
    pub fn add(&self, o: &Cnf) -> Cnf {
        let Some(l) = o.lead() else { return *self };
        let mut x = o.0;
        x[l] += self.0[l];
        for e in l + 1..N {
            x[e] = self.0[e];
        }
        Cnf(x)
    }

    pub fn mul(&self, o: &Cnf) -> Cnf {
        let Some(l) = self.lead() else { return Cnf([0; N]) };
        let mut acc = Cnf([0; N]);
        for e in (0..N).rev() {
            let n = o.0[e];
            if n == 0 {
                continue;
            }
            let term = if e == 0 {
                let mut x = self.0;
                x[l] *= n;
                Cnf(x)
            } else {
                let mut x = [0; N];
                x[l + e] = n;
                Cnf(x)
            };
            acc = acc.add(&term);
        }
        acc
    }

    /// The `g` with `self + g == b`, if `self <= b`.
    pub fn left_subtract(&self, b: &Cnf) -> Option<Cnf> {
        if self.cmp(b).is_gt() {
            return None;
        }
        let Some(d) = (0..N).rev().find(|&e| self.0[e] != b.0[e]) else { return Some(Cnf([0; N])) };
        let mut x = b.0;
        x[d] -= self.0[d];
        for e in d + 1..N {
            x[e] = 0;
        }
        Some(Cnf(x))
    }

    pub fn literal(&self) -> String {
        let parts: Vec<String> = (0..N)
            .rev()
            .filter(|&e| self.0[e] > 0)
            .map(|e| match (e, self.0[e]) {
                (0, c) => c.to_string(),
                (1, 1) => "w".into(),
                (1, c) => format!("w*{c}"),
                (e, 1) => format!("w^{e}"),
                (e, c) => format!("w^{e}*{c}"),
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }

    pub fn ordinal(&self) -> Ordinal {
        self.literal().parse().expect("literal parses")
    }
}

/// All `w^2*a + w*b + c` with coefficients below `bound`.
pub fn triples(bound: u64) -> Vec<Cnf> {
    let mut v = Vec::new();
    for a in 0..bound {
        for b in 0..bound {
            for c in 0..bound {
                v.push(Cnf::triple(a, b, c));
            }
        }
    }
    v
}
