//! A small structured assembly language for 3-tape machines.
//!
//! ```text
//! main: onlimit DONE
//!   LOOP: goto LOOP
//!   DONE: halt
//! ```
//!
//! A line whose first token `NAME:` starts in column 0 opens a routine; labels
//! elsewhere must be indented or follow a `;`. Instructions are separated by
//! newlines or `;`, and `#` starts a comment.
//!
//! `write`, `move` and `on ... goto` take one machine step each. `goto`, `call`,
//! `halt` and falling off the end of a routine are free: they only decide which
//! step comes next. See [`compile`] for how limits are dispatched.

mod compile;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::machine::Move;

pub use compile::compile;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct AsmError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    fn err(self, msg: impl Into<String>) -> AsmError {
        AsmError { line: self.line, col: self.col, msg: msg.into() }
    }
}

/// Per-tape bits `(input, scratch, output)`; `None` is `_`.
pub type Pattern = [Option<u8>; 3];

pub fn pattern_matches(p: &Pattern, read: u8) -> bool {
    p.iter().enumerate().all(|(k, b)| b.is_none_or(|b| read >> (2 - k) & 1 == b))
}

/// Applies a write pattern to a read triple; `_` keeps the bit.
pub fn pattern_write(p: &Pattern, read: u8) -> u8 {
    p.iter().enumerate().fold(0, |acc, (k, b)| acc | b.unwrap_or(read >> (2 - k) & 1) << (2 - k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    Write(Pattern),
    Move(Move),
    On(Pattern, String),
    Goto(String),
    Call(String),
    Halt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Routine {
    pub name: String,
    pub pos: Pos,
    pub onlimit: Option<(String, Pos)>,
    pub body: Vec<(Instr, Pos)>,
    /// Label to instruction index; a trailing label points one past the end.
    pub labels: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsmUnit {
    pub routines: Vec<Routine>,
}

impl AsmUnit {
    pub fn routine(&self, name: &str) -> Option<&Routine> {
        self.routines.iter().find(|r| r.name == name)
    }
}

fn pattern_text(p: &Pattern) -> String {
    let b: Vec<String> = p.iter().map(|b| b.map_or("_".into(), |b| b.to_string())).collect();
    format!("({})", b.join(","))
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Write(p) => write!(f, "write {}", pattern_text(p)),
            Instr::Move(m) => write!(f, "move {}", m.letter()),
            Instr::On(p, l) => write!(f, "on {} goto {l}", pattern_text(p)),
            Instr::Goto(l) => write!(f, "goto {l}"),
            Instr::Call(r) => write!(f, "call {r}"),
            Instr::Halt => write!(f, "halt"),
        }
    }
}

impl fmt::Display for AsmUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.routines {
            writeln!(f, "{}:", r.name)?;
            if let Some((l, _)) = &r.onlimit {
                writeln!(f, "  onlimit {l}")?;
            }
            for i in 0..=r.body.len() {
                for (l, _) in r.labels.iter().filter(|(_, &at)| at == i) {
                    writeln!(f, "  {l}:")?;
                }
                if let Some((ins, _)) = r.body.get(i) {
                    writeln!(f, "  {ins}")?;
                }
            }
        }
        Ok(())
    }
}

fn is_name(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Seg<'a> {
    text: &'a str,
    pos: Pos,
}

/// Splits off whitespace-separated tokens while tracking columns.
fn tokens(seg: &Seg<'_>) -> Vec<(String, Pos)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in seg.text.char_indices().chain([(seg.text.len(), ' ')]) {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((seg.text[s..i].to_string(), Pos { line: seg.pos.line, col: seg.pos.col + s }));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

fn parse_pattern(s: &str, pos: Pos, wild: bool) -> Result<Pattern, AsmError> {
    let inner = s
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| pos.err(format!("expected a triple like (1,_,0), found `{s}`")))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(pos.err(format!("expected three bits in `{s}`")));
    }
    let mut p = [None; 3];
    for (k, b) in parts.iter().enumerate() {
        p[k] = match *b {
            "0" => Some(0),
            "1" => Some(1),
            "_" if wild => None,
            _ => return Err(pos.err(format!("bad bit `{b}` in `{s}`"))),
        };
    }
    Ok(p)
}

fn parse_instr(toks: &[(String, Pos)]) -> Result<Instr, AsmError> {
    let (head, pos) = (&toks[0].0, toks[0].1);
    let arg = |i: usize| toks.get(i).map(|t| t.0.as_str());
    let expect_len = |n: usize| {
        if toks.len() != n {
            let at = toks.get(n).map_or(pos, |t| t.1);
            Err(at.err(format!("`{head}` takes {} operand(s)", n - 1)))
        } else {
            Ok(())
        }
    };
    let label = |i: usize| -> Result<String, AsmError> {
        match arg(i) {
            Some(l) if is_name(l) => Ok(l.to_string()),
            Some(l) => Err(toks[i].1.err(format!("bad label `{l}`"))),
            None => Err(pos.err(format!("`{head}` needs a label"))),
        }
    };
    match head.as_str() {
        "write" => {
            let p = toks[1..].iter().map(|t| t.0.as_str()).collect::<String>();
            if toks.len() < 2 {
                return Err(pos.err("`write` needs a triple"));
            }
            Ok(Instr::Write(parse_pattern(&p, toks[1].1, true)?))
        }
        "move" => {
            expect_len(2)?;
            match arg(1) {
                Some("L") => Ok(Instr::Move(Move::L)),
                Some("R") => Ok(Instr::Move(Move::R)),
                Some("S") => Ok(Instr::Move(Move::S)),
                _ => Err(toks[1].1.err("expected L, R or S")),
            }
        }
        "on" => {
            let g = toks.iter().position(|t| t.0 == "goto").ok_or_else(|| pos.err("expected `on (...) goto LABEL`"))?;
            if g < 2 || g + 2 != toks.len() {
                return Err(pos.err("expected `on (...) goto LABEL`"));
            }
            let p = toks[1..g].iter().map(|t| t.0.as_str()).collect::<String>();
            Ok(Instr::On(parse_pattern(&p, toks[1].1, true)?, label(g + 1)?))
        }
        "goto" => {
            expect_len(2)?;
            Ok(Instr::Goto(label(1)?))
        }
        "call" => {
            expect_len(2)?;
            Ok(Instr::Call(label(1)?))
        }
        "halt" => {
            expect_len(1)?;
            Ok(Instr::Halt)
        }
        other => Err(pos.err(format!("unknown instruction `{other}`"))),
    }
}

/// Parses assembly text; labels and call targets are checked here.
pub fn parse(text: &str) -> Result<AsmUnit, AsmError> {
    let mut routines: Vec<Routine> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut off = 0;
        for part in line.split(';') {
            let seg = Seg { text: part, pos: Pos { line: ln + 1, col: off + 1 } };
            off += part.len() + 1;
            let mut toks = tokens(&seg);
            if toks.is_empty() {
                continue;
            }
            if seg.pos.col == 1 && toks[0].1.col == 1 && toks[0].0.ends_with(':') {
                let (name, pos) = toks.remove(0);
                let name = name.trim_end_matches(':').to_string();
                if !is_name(&name) {
                    return Err(pos.err(format!("bad routine name `{name}`")));
                }
                if routines.iter().any(|r| r.name == name) {
                    return Err(pos.err(format!("duplicate routine `{name}`")));
                }
                routines.push(Routine { name, pos, onlimit: None, body: Vec::new(), labels: BTreeMap::new() });
            }
            let Some(r) = routines.last_mut() else {
                return Err(toks[0].1.err("instruction outside a routine"));
            };
            while toks.first().is_some_and(|t| t.0.ends_with(':')) {
                let (l, pos) = toks.remove(0);
                let l = l.trim_end_matches(':').to_string();
                if !is_name(&l) {
                    return Err(pos.err(format!("bad label `{l}`")));
                }
                if r.labels.insert(l.clone(), r.body.len()).is_some() {
                    return Err(pos.err(format!("duplicate label `{l}` in `{}`", r.name)));
                }
            }
            if toks.is_empty() {
                continue;
            }
            if toks[0].0 == "onlimit" {
                if toks.len() != 2 || !is_name(&toks[1].0) {
                    return Err(toks[0].1.err("expected `onlimit LABEL`"));
                }
                if r.onlimit.is_some() {
                    return Err(toks[0].1.err(format!("second `onlimit` in `{}`", r.name)));
                }
                r.onlimit = Some((toks[1].0.clone(), toks[1].1));
                continue;
            }
            let ins = parse_instr(&toks)?;
            r.body.push((ins, toks[0].1));
        }
    }
    let unit = AsmUnit { routines };
    check(&unit)?;
    Ok(unit)
}

fn check(u: &AsmUnit) -> Result<(), AsmError> {
    if u.routine("main").is_none() {
        return Err(Pos { line: 1, col: 1 }.err("no routine named `main`"));
    }
    for r in &u.routines {
        let label = |l: &str, pos: Pos| {
            if r.labels.contains_key(l) {
                Ok(())
            } else {
                Err(pos.err(format!("unresolved label `{l}` in `{}`", r.name)))
            }
        };
        if let Some((l, pos)) = &r.onlimit {
            label(l, *pos)?;
        }
        for (ins, pos) in &r.body {
            match ins {
                Instr::On(_, l) | Instr::Goto(l) => label(l, *pos)?,
                Instr::Call(n) if u.routine(n).is_none() => {
                    return Err(pos.err(format!("call to unknown routine `{n}`")));
                }
                _ => {}
            }
        }
    }
    Ok(())
}
