//! Clocks: programs that halt on blank input at exactly a given stage.
//!
//! `alpha = w^e1*c1 + ... + w^er*cr + n` is run as a sequence of phases, one
//! `w^e` interval per unit of each coefficient, followed by `n` extra steps.
//!
//! Scratch layout, with `E` the largest exponent:
//! - cell 0: the top flag of the current phase. An `e = 1` phase holds it at 1,
//!   so every limit ends that phase.
//! - cells `1..e-1`: lower flags `f_1..f_{e-2}`. At a limit, the least flag
//!   that reads 0 is flashed on and off and the flags below it are cleared;
//!   when all lower flags read 1 the top flag is flashed instead. The top
//!   flag then reads 1 exactly at multiples of `w^e` within the phase.
//! - cells `E..`: the number of finished phases, in unary.
//!
//! Output layout: cell 0 marks the last phase and cell `e-1` (for `e >= 2`)
//! marks where the lower flags end.
//!
//! The handler's first instruction tests cell 0, so the closing limit of the
//! last phase is recognized in the very step it occurs.

use std::fmt::Write;

use super::ProgramError;
use crate::asm;
use crate::machine::Program;
use crate::ordinal::Ordinal;

/// Largest coefficient sum and finite part a clock is generated for.
pub const MAX_PHASES: u64 = 256;
pub const MAX_FINITE: u64 = 100_000;

/// Phase exponents of `alpha` in order, and its finite part.
fn phases(alpha: &Ordinal, max_exp: u32) -> Result<(Vec<usize>, u64), ProgramError> {
    let mut out = Vec::new();
    for t in alpha.terms() {
        let Some(e) = t.exp.as_nat() else {
            return Err(ProgramError::Unsupported(format!("{alpha} has a transfinite exponent")));
        };
        if e == 0 {
            continue;
        }
        if e > u64::from(max_exp) {
            return Err(ProgramError::Unsupported(format!("{alpha} needs limit depth {e}, above {max_exp}")));
        }
        if out.len() as u64 + t.coeff > MAX_PHASES {
            return Err(ProgramError::Unsupported(format!("{alpha} has more than {MAX_PHASES} limit phases")));
        }
        out.extend(std::iter::repeat_n(e as usize, t.coeff as usize));
    }
    let n = alpha.finite_part();
    if n > MAX_FINITE {
        return Err(ProgramError::Unsupported(format!("finite part {n} exceeds {MAX_FINITE}")));
    }
    Ok((out, n))
}

/// Assembly source of the clock for `alpha`, with exponents at most `max_exp`.
pub fn clock_source(alpha: &Ordinal, max_exp: u32) -> Result<String, ProgramError> {
    let (ph, n) = phases(alpha, max_exp)?;
    let mut s = String::from("main:\n");
    if ph.is_empty() {
        for _ in 0..=n {
            s += "  move S\n";
        }
        return Ok(s);
    }
    let big = *ph.iter().max().unwrap_or(&1);
    let last = ph.len() - 1;
    s += "  onlimit H\n";
    setup(&mut s, &ph, 0, big);
    s += "  IDLE: goto IDLE\n";
    s += "  H: on (_,1,1) goto FINAL\n  on (_,1,0) goto ADV\n  move R\n";
    for i in 1..big {
        let _ = writeln!(s, "  on (_,_,1) goto TOP{i}\n  on (_,0,_) goto F{i}\n  move R");
    }
    s += "  goto IDLE\n";
    for i in 1..big {
        let _ = writeln!(s, "  TOP{i}:");
        clear_below(&mut s, i);
        s += "  move L\n  write (_,1,_)\n  write (_,0,_)\n  goto IDLE\n";
        let _ = writeln!(s, "  F{i}: write (_,1,_)\n  write (_,0,_)");
        clear_below(&mut s, i);
        s += "  goto IDLE\n";
    }
    s += "  ADV:\n";
    for _ in 0..big {
        s += "  move R\n";
    }
    for k in 0..last {
        let _ = writeln!(s, "  on (_,0,_) goto N{}\n  move R", k + 1);
    }
    s += "  goto IDLE\n";
    for p in 1..=last {
        let _ = writeln!(s, "  N{p}: write (_,1,_)");
        for _ in 0..big + p - 1 {
            s += "  move L\n";
        }
        setup(&mut s, &ph, p, big);
        s += "  goto IDLE\n";
    }
    s += "  FINAL:\n";
    for _ in 0..n {
        s += "  move S\n";
    }
    s += "  halt\n";
    Ok(s)
}

/// From cell `i`, walks down clearing flag cells `i-1..1`; ends on cell 1.
fn clear_below(s: &mut String, i: usize) {
    for _ in 1..i {
        s.push_str("  move L\n  write (_,0,_)\n");
    }
}

/// Writes the flag field for phase `p` from cell 0 and returns to cell 0.
fn setup(s: &mut String, ph: &[usize], p: usize, big: usize) {
    let e = ph[p];
    for c in 0..big {
        let top = u8::from(c == 0 && e == 1);
        let mark = u8::from((c == 0 && p + 1 == ph.len()) || (e >= 2 && c == e - 1));
        let _ = writeln!(s, "  write (_,{top},{mark})\n  move R");
    }
    for _ in 0..big {
        s.push_str("  move L\n");
    }
}

/// A program that halts on blank input at exactly stage `alpha`.
pub fn gen_clock(alpha: &Ordinal) -> Result<Program, ProgramError> {
    gen_clock_depth(alpha, crate::engine::Budgets::default().max_limit_depth)
}

pub fn gen_clock_depth(alpha: &Ordinal, max_exp: u32) -> Result<Program, ProgramError> {
    let src = clock_source(alpha, max_exp)?;
    let unit = asm::parse(&src).map_err(ProgramError::Asm)?;
    asm::compile(&unit).map_err(ProgramError::Asm)
}
