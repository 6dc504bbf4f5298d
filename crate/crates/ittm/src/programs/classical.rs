//! Ordinary Turing machines over `{0,1}` and the infinite time deciders that
//! run them.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::Value;

use super::ProgramError;
use crate::asm;
use crate::machine::{Move, Program};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub next: String,
    pub write: u8,
    pub mv: Move,
}

/// A deterministic machine on a one-way tape; a missing entry halts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalTM {
    pub states: Vec<String>,
    pub start: String,
    pub table: BTreeMap<(String, u8), Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Halting {
    Halted { steps: u64, tape: Vec<u8> },
    Running,
}

impl ClassicalTM {
    pub fn new(states: &[&str], start: &str) -> Self {
        ClassicalTM { states: states.iter().map(|s| s.to_string()).collect(), start: start.into(), table: BTreeMap::new() }
    }

    pub fn set(&mut self, state: &str, read: u8, next: &str, write: u8, mv: Move) {
        self.table.insert((state.into(), read), Transition { next: next.into(), write, mv });
    }

    /// Parses `{"states":[...],"start":"s0","table":{"s0,0":["s1","1","R"]}}`.
    pub fn from_json(text: &str) -> Result<Self, ProgramError> {
        let bad = |m: String| ProgramError::Format(m);
        let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let states: Vec<String> = v["states"]
            .as_array()
            .ok_or_else(|| bad("`states` must be an array".into()))?
            .iter()
            .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad("state names must be strings".into())))
            .collect::<Result<_, _>>()?;
        for (i, s) in states.iter().enumerate() {
            if s.is_empty() || states[..i].contains(s) {
                return Err(bad(format!("empty or duplicate state `{s}`")));
            }
        }
        let start = v["start"].as_str().ok_or_else(|| bad("`start` must be a string".into()))?.to_string();
        if !states.contains(&start) {
            return Err(bad(format!("start state `{start}` is not declared")));
        }
        let mut tm = ClassicalTM { states, start, table: BTreeMap::new() };
        let table = match &v["table"] {
            Value::Null => serde_json::Map::new(),
            Value::Object(m) => m.clone(),
            _ => return Err(bad("`table` must be an object".into())),
        };
        for (key, val) in &table {
            let (s, r) = key.rsplit_once(',').ok_or_else(|| bad(format!("key `{key}` is not `state,bit`")))?;
            let read = bit(r).ok_or_else(|| bad(format!("bad bit in key `{key}`")))?;
            if !tm.states.iter().any(|x| x == s) {
                return Err(bad(format!("key `{key}` names an undeclared state")));
            }
            let arr = val.as_array().filter(|a| a.len() == 3).ok_or_else(|| bad(format!("entry `{key}` must be [next, bit, move]")))?;
            let f: Vec<&str> = arr.iter().filter_map(Value::as_str).collect();
            if f.len() != 3 {
                return Err(bad(format!("entry `{key}` must hold three strings")));
            }
            if !tm.states.iter().any(|x| x == f[0]) {
                return Err(bad(format!("entry `{key}` goes to undeclared state `{}`", f[0])));
            }
            let write = bit(f[1]).ok_or_else(|| bad(format!("bad write bit in `{key}`")))?;
            let mv = match f[2] {
                "L" => Move::L,
                "R" => Move::R,
                "S" => Move::S,
                m => return Err(bad(format!("bad move `{m}` in `{key}`"))),
            };
            tm.set(s, read, f[0], write, mv);
        }
        Ok(tm)
    }

    pub fn to_json(&self) -> String {
        let mut table = serde_json::Map::new();
        for ((s, r), t) in &self.table {
            let e = vec![t.next.clone(), t.write.to_string(), t.mv.letter().to_string()];
            table.insert(format!("{s},{r}"), e.into());
        }
        serde_json::json!({"states": self.states, "start": self.start, "table": table}).to_string()
    }

    /// Runs for at most `max_steps` transitions from `input`.
    pub fn simulate(&self, input: &[u8], max_steps: u64) -> Halting {
        let mut tape = input.to_vec();
        let (mut state, mut head) = (self.start.clone(), 0usize);
        for steps in 0..=max_steps {
            if head >= tape.len() {
                tape.resize(head + 1, 0);
            }
            let Some(t) = self.table.get(&(state.clone(), tape[head])) else {
                return Halting::Halted { steps, tape };
            };
            if steps == max_steps {
                break;
            }
            tape[head] = t.write;
            head = t.mv.apply(head);
            state = t.next.clone();
        }
        Halting::Running
    }

    fn index(&self, s: &str) -> usize {
        self.states.iter().position(|x| x == s).expect("declared state")
    }
}

fn bit(s: &str) -> Option<u8> {
    match s {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// Assembly routine `name` running `tm` on the scratch tape from the current
/// head position; it returns when `tm` halts.
///
/// With `lanes`, machine cell `i` is scratch cell `2i`, and every step also
/// sets scratch cell `2i+1` so the visited region can be found afterwards.
fn embed(tm: &ClassicalTM, name: &str, lanes: bool) -> String {
    let mut s = format!("{name}:\n  goto Q{}\n", tm.index(&tm.start));
    for (i, q) in tm.states.iter().enumerate() {
        let _ = writeln!(s, "  Q{i}: on (_,1,_) goto Q{i}x1");
        for r in 0..2u8 {
            if r == 1 {
                let _ = writeln!(s, "  Q{i}x1:");
            }
            let Some(t) = tm.table.get(&(q.clone(), r)) else {
                s += "  goto END\n";
                continue;
            };
            let _ = writeln!(s, "  write (_,{},_)", t.write);
            let moves: &[char] = match (lanes, t.mv) {
                (false, m) => &[m.letter()],
                (true, Move::R) => &['R', 'R'],
                (true, Move::L) => &['R', 'L', 'L', 'L'],
                (true, Move::S) => &['R', 'L'],
            };
            for (k, m) in moves.iter().enumerate() {
                let _ = writeln!(s, "  move {m}");
                if lanes && k == 0 {
                    s += "  write (_,1,_)\n";
                }
            }
            let _ = writeln!(s, "  goto Q{}", tm.index(&t.next));
        }
    }
    s += "  END:\n";
    s
}

/// `tm` as an assembly routine named `tm` working directly on the scratch tape.
pub fn embed_classical(tm: &ClassicalTM) -> String {
    embed(tm, "tm", false)
}

fn build(src: &str) -> Result<Program, ProgramError> {
    asm::compile(&asm::parse(src).map_err(ProgramError::Asm)?).map_err(ProgramError::Asm)
}

/// Decides whether `tm` halts on the numeral `n`: output 1 at a finite stage
/// if it does, output 0 at stage w if it does not.
pub fn gen_halt_decider(tm: &ClassicalTM, n: usize) -> Result<Program, ProgramError> {
    let mut s = String::from("main:\n  onlimit LIM\n  write (1,_,_)\n");
    s += &"  write (_,1,_)\n  move R\n".repeat(n);
    s += &"  move L\n".repeat(n);
    s += "  call tm\n  SEEK: on (1,_,_) goto HOME\n  move L\n  goto SEEK\n";
    s += "  HOME: write (_,_,1)\n  halt\n  LIM: write (_,_,0)\n  halt\n";
    s += &embed_classical(tm);
    build(&s)
}

/// Decides `exists n. P(n)` where `tm` on numeral `n` halts with cell 0 holding
/// `P(n)`. Candidates are tried in order; the first witness gives output 1,
/// and the limit at w gives output 0. A `tm` that runs forever on some
/// candidate stalls the search, and the limit then reports 0 as well.
///
/// Layout: input cell 0 marks the left end and the input cells `2i+1` hold the
/// candidate in unary; the machine tape lives on the even scratch cells with
/// its visited marks on the odd ones.
pub fn exists_decider(tm: &ClassicalTM) -> Result<Program, ProgramError> {
    let s = format!(
        "\
main:
  onlimit LIM
  write (1,_,_)
  COPY: move R
  on (0,_,_) goto COPIED
  write (_,1,_)
  move L
  write (_,1,_)
  move R
  move R
  goto COPY
  COPIED: move L
  call home
  call tm
  call home
  on (_,1,_) goto YES
  CLEAN: move R
  on (_,0,_) goto CLEANED
  write (_,0,_)
  move L
  write (_,0,_)
  move R
  move R
  goto CLEAN
  CLEANED: move L
  call home
  move R
  INC: on (0,_,_) goto SETC
  move R
  move R
  goto INC
  SETC: write (1,_,_)
  move L
  call home
  goto COPY
  YES: write (_,_,1)
  halt
  LIM: write (_,_,0)
  halt
home:
  H: on (1,_,_) goto AT
  move L
  move L
  goto H
  AT:
{}",
        embed(tm, "tm", true)
    );
    build(&s)
}
