//! The count-through decider for well-orders.
//!
//! Input: a relation coded by [`rel_encode`](crate::machine::rel_encode), bit
//! `pair(i, j)` standing for `i < j`. Output cell 0 ends up 1 iff the relation
//! is a well-order of its field.
//!
//! The first w steps sweep the input and mark on the output tape every cell up
//! to the last 1 seen; at the limit those marks bound all further work. After
//! that the pair cells are spread out so pair `p` owns cells `3p+3..3p+6`:
//!
//! ```text
//! slot a (3p+3): input R     scratch DS (diagonal start)  output M (region)
//! slot b (3p+4): input PEB   scratch GI (row of guess)    output GJ (column of guess)
//! slot c (3p+5): input P     scratch X  (row k)           output Y  (column k)
//! ```
//!
//! Cells 0..3 are a header: scratch 0 records that the first limit has passed,
//! scratch 1 is the flag flashed on every change of guess, output 0 is the
//! answer.
//!
//! Pair `(i, j)` sits at offset `i` of diagonal `i + j`, so the cells with
//! `i = k` are the diagonal starts shifted right `k` times and the cells with
//! `j = k` are the diagonal ends shifted left `k` times, dropping marks that
//! would cross a diagonal boundary.
//!
//! Each round takes the first remaining pair's left element as guess `g` and
//! moves the guess to `h` whenever some `(h, g)` remains, flashing the flag. If
//! the guess settles, `g` is checked to be below every other element of the
//! remaining field and is erased. Acceptance comes when nothing remains. A
//! guess that keeps changing runs into a limit with the flag on, which rejects.
//! Linearity is checked along the way rather than in a separate pass: a
//! relation whose field can be erased one element at a time, each below all
//! the remaining ones and none related to itself, is a strict linear order.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::ProgramError;
use crate::asm;
use crate::machine::{rel_encode, Program};
use crate::tape::TapeRep;

struct Src(String);

impl Src {
    fn l(&mut self, s: &str) -> &mut Self {
        self.0.push_str("  ");
        self.0.push_str(s);
        self.0.push('\n');
        self
    }

    fn lab(&mut self, s: &str) -> &mut Self {
        let _ = writeln!(self.0, "  {s}:");
        self
    }

    fn mv(&mut self, dir: char, n: usize) -> &mut Self {
        for _ in 0..n {
            let _ = writeln!(self.0, "  move {dir}");
        }
        self
    }
}

/// Phase A and the limit handler.
fn phase_a(s: &mut Src) {
    s.0 += "main:\n";
    s.l("onlimit LIM");
    s.lab("SWEEP").l("on (1,_,_) goto FILL").l("move R").l("goto SWEEP");
    s.lab("FILL").l("write (_,_,1)").l("move L").l("on (_,_,1) goto BACK").l("goto FILL");
    s.lab("BACK").l("move R").l("on (_,_,1) goto BACK").l("goto SWEEP");
    s.lab("LIM").l("on (_,1,_) goto REJECT").l("on (_,_,0) goto ACCEPT0");
}

/// Moves pair `p` from natural cell `p` to `3p+3`, using two scratch cursors.
fn stretch(s: &mut Src) {
    s.l("write (_,1,_)").mv('R', 4).l("write (_,1,_)").mv('L', 4);
    s.lab("MEAS").l("move R").l("on (_,_,0) goto MEASDONE");
    s.l("write (_,1,_)").l("move L").l("write (_,0,_)").l("move R");
    s.lab("MT").l("move R").l("on (_,0,_) goto MT");
    s.l("write (_,0,_)").mv('R', 3).l("write (_,1,_)");
    s.lab("ML").l("move L").l("on (_,0,_) goto ML").l("goto MEAS");
    s.lab("MEASDONE").l("move L");
    s.lab("DOWN").l("on (1,_,_) goto D1");
    s.l("write (_,_,0)");
    s.lab("DT0").l("move R").l("on (_,0,_) goto DT0");
    s.l("move L").l("write (0,_,1)").l("goto DMV");
    s.lab("D1").l("write (0,_,0)");
    s.lab("DT1").l("move R").l("on (_,0,_) goto DT1");
    s.l("move L").l("write (1,_,1)");
    s.lab("DMV").l("move R").l("write (_,0,_)").mv('L', 3).l("write (_,1,_)");
    s.lab("DL").l("move L").l("on (_,0,_) goto DL");
    s.l("write (_,0,_)").l("move L").l("on (_,_,0) goto STRDONE").l("write (_,1,_)").l("goto DOWN");
    s.lab("STRDONE").l("move R").l("write (_,0,_)").l("move L").l("write (_,1,_)");
}

/// Marks diagonal starts, extending the region to whole diagonals.
fn diagonals(s: &mut Src) {
    s.mv('R', 3).l("write (_,1,_)").mv('R', 3).l("write (_,1,_)");
    s.l("on (_,_,0) goto DSEARLY").mv('L', 3);
    s.lab("PA").l("move R").l("on (0,_,_) goto PAF").mv('R', 2).l("on (_,1,_) goto PFIN").l("goto PA");
    s.lab("PAF").l("write (1,_,_)").l("move L");
    s.lab("PB").mv('R', 3).l("on (_,1,_) goto PC").l("goto PB");
    s.lab("PC").l("on (_,_,1) goto PC1").l("write (_,_,1)");
    s.lab("PC1").l("move R").l("on (0,_,_) goto PCF").mv('R', 2).l("goto PC");
    s.lab("PCF").l("write (1,_,_)").l("move L");
    s.lab("PD").l("on (_,1,_) goto PE").mv('L', 3).l("goto PD");
    s.lab("PE").mv('L', 3);
    s.lab("PF").l("on (_,1,_) goto PA").mv('L', 3).l("goto PF");
    s.lab("PFIN").l("on (_,_,1) goto PG1").l("write (_,_,1)");
    s.lab("PG1").l("move R").l("on (0,_,_) goto PGF").mv('R', 2).l("goto PFIN");
    s.lab("PGF").mv('R', 2).l("on (_,_,0) goto LASTDS").l("write (_,1,_)").l("call clrpeb").mv('R', 3);
    s.lab("NX").l("on (_,1,_) goto PA").mv('R', 3).l("goto NX");
    s.lab("LASTDS").l("write (_,1,_)").l("call clrpeb").l("call home").l("goto ROUND");
    s.lab("DSEARLY").mv('L', 3).l("call home").l("goto ROUND");
}

fn rounds(s: &mut Src) {
    s.lab("ROUND").mv('R', 3);
    s.lab("RA").l("on (_,_,0) goto RNONE").l("on (1,_,_) goto RFOUND").mv('R', 3).l("goto RA");
    s.lab("RNONE").mv('L', 3).l("call home").l("goto ACCEPT");
    s.lab("RFOUND").mv('R', 2).l("write (1,_,_)").mv('L', 2).l("call home").l("call setguess");
    s.lab("DESCENT").mv('R', 3);
    s.lab("DA").l("on (_,_,0) goto DMIN").l("on (0,_,_) goto DSKIP").l("move R");
    s.l("on (_,1,1) goto DIRR").l("on (_,0,1) goto DHIT").mv('R', 2).l("goto DA");
    s.lab("DSKIP").mv('R', 3).l("goto DA");
    s.lab("DHIT").l("move R").l("write (1,_,_)").mv('L', 2).l("call home");
    s.l("move R").l("write (_,1,_)").l("write (_,0,_)").l("move L");
    s.l("call setguess").l("goto DESCENT");
    s.lab("DIRR").l("move L").l("call home").l("goto REJECT");
    s.lab("DMIN").mv('L', 3).l("call home");
    verify(s);
    s.lab("ERASE").mv('R', 3);
    s.lab("ER").l("on (_,_,0) goto ERE").l("move R").l("on (_,1,_) goto ERX").l("on (_,_,1) goto ERX");
    s.mv('R', 2).l("goto ER");
    s.lab("ERX").l("move L").l("write (0,_,_)").mv('R', 3).l("goto ER");
    s.lab("ERE").mv('L', 3).l("call home").l("goto ROUND");
    s.lab("ACCEPT").l("call cleanup").l("write (_,_,1)").l("halt");
    s.lab("REJECT").l("call cleanup").l("write (_,_,0)").l("halt");
    s.lab("ACCEPT0").l("write (_,_,1)").l("halt");
}

/// For k = 0, 1, ...: if k is in the field, k != g and (g, k) is missing,
/// reject. Also counts the field elements other than g (up to two) and notes
/// any that only pair with g; such an element would drop out of the field
/// once g is erased, which a linear order on three or more elements forbids.
///
/// Per k the state carries `e` (row k is inside the region), `f` (k is in
/// the field), `g` (k is the guess), `h` (`(g, k)` is present) and `s` (k pairs
/// with something other than g).
fn verify(s: &mut Src) {
    s.l("call initxy");
    s.lab("VLOOP").mv('R', 3).l("goto V00000");
    let bits = |b: &[bool]| b.iter().map(|&x| if x { '1' } else { '0' }).collect::<String>();
    let four = |s: &mut Src, lab: &str, on: &str| {
        for (k, (x, y)) in [(0, 0), (0, 1), (1, 0)].into_iter().enumerate() {
            let pat = on.replacen('a', &x.to_string(), 1).replacen('b', &y.to_string(), 1);
            let _ = writeln!(s.0, "  on {pat} goto {lab}{}", ["00", "01", "10"][k]);
        }
        let _ = writeln!(s.0, "  goto {lab}11");
    };
    for code in 0..32u8 {
        let st: Vec<bool> = (0..5).map(|i| code >> (4 - i) & 1 == 1).collect();
        let v = format!("V{}", bits(&st));
        let (e, f, g, h, sv) = (st[0], st[1], st[2], st[3], st[4]);
        let end = if !e {
            "VEDONE"
        } else if f && !g && !h {
            "VEREJ"
        } else if f && !g && !sv {
            "VEVAN"
        } else if f && !g {
            "VEIN"
        } else {
            "VENEXT"
        };
        s.lab(&v).l(&format!("on (_,_,0) goto {end}")).l(&format!("on (1,_,_) goto {v}r1")).l(&format!("goto {v}r0"));
        for r in [false, true] {
            let rl = format!("{v}r{}", u8::from(r));
            s.lab(&rl).l("move R");
            four(s, &format!("{rl}b"), "(_,a,b)");
            for (gi, gj) in [(false, false), (false, true), (true, false), (true, true)] {
                let bl = format!("{rl}b{}{}", u8::from(gi), u8::from(gj));
                s.lab(&bl).l("move R");
                four(s, &format!("{bl}x"), "(_,a,b)");
                for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
                    let n = [
                        e || x,
                        f || (r && (x || y)),
                        g || (x && gi),
                        h || (gi && y && r),
                        sv || (r && ((x && !gj) || (y && !gi))),
                    ];
                    s.lab(&format!("{bl}x{}{}", u8::from(x), u8::from(y))).l("move R").l(&format!("goto V{}", bits(&n)));
                }
            }
        }
    }
    // Header: output 1 and input 2 count the other field elements, scratch 2
    // marks an element that would vanish.
    s.lab("VEDONE").mv('L', 3).l("call home").mv('R', 2).l("on (1,1,_) goto VDREJ");
    s.l("write (0,0,_)").l("move L").l("write (_,_,0)").l("move L").l("goto ERASE");
    s.lab("VDREJ").mv('L', 2).l("goto REJECT");
    s.lab("VEREJ").mv('L', 3).l("call home").l("goto REJECT");
    s.lab("VEVAN").mv('L', 3).l("call home").mv('R', 2).l("write (_,1,_)").mv('L', 2).l("goto VECOUNT");
    s.lab("VEIN").mv('L', 3).l("call home");
    s.lab("VECOUNT").l("move R").l("on (_,_,1) goto VEC2").l("write (_,_,1)").l("move L").l("goto VESHIFT");
    s.lab("VEC2").l("move R").l("write (1,_,_)").mv('L', 2).l("goto VESHIFT");
    s.lab("VENEXT").mv('L', 3).l("call home");
    s.lab("VESHIFT").l("call shiftr").l("call shiftl").l("goto VLOOP");
}

fn routines(s: &mut Src) {
    s.0 += "home:\n";
    s.lab("H").l("on (_,_,0) goto D").mv('L', 3).l("goto H").lab("D");

    s.0 += "clrpeb:\n";
    s.l("move L");
    s.lab("A").l("move L").l("write (0,_,_)").l("move L").l("on (_,1,_) goto B").l("move L").l("goto A");
    s.lab("B").l("move L");
    s.lab("C").l("move L").l("write (0,_,_)").l("move L").l("on (_,1,_) goto D").l("move L").l("goto C");
    s.lab("D");

    // X := diagonal starts, Y := diagonal ends.
    s.0 += "initxy:\n";
    s.mv('R', 3);
    s.lab("A").l("on (_,_,0) goto END").l("on (_,1,_) goto DSP").mv('R', 2).l("write (_,0,0)").l("move R").l("goto A");
    s.lab("DSP").l("move L").l("write (_,_,1)").mv('R', 3).l("write (_,1,0)").l("move R").l("goto A");
    s.lab("END").l("on (_,0,_) goto FIN").l("move L").l("write (_,_,1)").l("move R");
    s.lab("FIN").mv('L', 3).l("call home");

    // X shifted right one pair; a mark landing on a diagonal start is dropped.
    s.0 += "shiftr:\n";
    s.mv('R', 3);
    s.lab("S0").l("on (_,_,0) goto E").mv('R', 2).l("on (_,1,_) goto S0x").l("move R").l("goto S0");
    s.lab("S0x").l("write (_,0,_)").l("move R").l("goto S1");
    s.lab("S1").l("on (_,_,0) goto E").l("on (_,1,_) goto S1d").mv('R', 2);
    s.l("on (_,1,_) goto S1x").l("write (_,1,_)").l("move R").l("goto S0");
    s.lab("S1x").l("move R").l("goto S1");
    s.lab("S1d").mv('R', 2).l("on (_,1,_) goto S0x").l("move R").l("goto S0");
    s.lab("E").mv('L', 3).l("call home");

    // Y shifted left one pair; a mark on a diagonal start is dropped.
    s.0 += "shiftl:\n";
    s.mv('R', 3);
    s.lab("A").l("on (_,_,0) goto E").l("on (_,1,_) goto DROP").mv('R', 2);
    s.l("on (_,_,1) goto M").l("move R").l("goto A");
    s.lab("M").l("write (_,_,0)").mv('L', 3).l("write (_,_,1)").mv('R', 4).l("goto A");
    s.lab("DROP").mv('R', 2).l("write (_,_,0)").l("move R").l("goto A");
    s.lab("E").mv('L', 3).l("call home");

    // Guess := left element of the pair marked P; sets GI and GJ, clears P.
    s.0 += "setguess:\n";
    s.l("call initxy");
    s.lab("LOOP").mv('R', 3);
    s.lab("F").mv('R', 2).l("on (1,1,_) goto HIT").l("on (1,0,_) goto MISS").l("move R").l("goto F");
    s.lab("MISS").mv('L', 2).l("call home").l("call shiftr").l("call shiftl").l("goto LOOP");
    s.lab("HIT").mv('L', 2).l("call home").mv('R', 3);
    s.lab("CP").l("on (_,_,0) goto CPE").mv('R', 2).l("write (0,_,_)");
    s.l("on (_,0,0) goto C00").l("on (_,0,1) goto C01").l("on (_,1,0) goto C10");
    s.l("move L").l("write (_,1,1)").l("goto CPN");
    s.lab("C00").l("move L").l("write (_,0,0)").l("goto CPN");
    s.lab("C01").l("move L").l("write (_,0,1)").l("goto CPN");
    s.lab("C10").l("move L").l("write (_,1,0)");
    s.lab("CPN").mv('R', 2).l("goto CP");
    s.lab("CPE").mv('L', 3).l("call home");

    // Clears every output cell but the answer, working right to left.
    s.0 += "cleanup:\n";
    s.mv('R', 3);
    s.lab("A").l("on (_,_,0) goto B").mv('R', 3).l("goto A");
    s.lab("B").mv('L', 3);
    s.lab("C").l("on (_,_,0) goto D").l("write (_,_,0)").l("move R").l("write (_,_,0)").l("move R").l("write (_,_,0)");
    s.mv('L', 5).l("goto C");
    s.lab("D").l("move R").l("write (_,_,0)").l("move R").l("write (_,_,0)").mv('L', 2);
}

/// Assembly source of the decider.
pub fn wo_source() -> String {
    let mut s = Src(String::new());
    phase_a(&mut s);
    stretch(&mut s);
    diagonals(&mut s);
    rounds(&mut s);
    routines(&mut s);
    s.0
}

pub fn wo_decider() -> Program {
    let unit = asm::parse(&wo_source()).expect("decider source parses");
    asm::compile(&unit).expect("decider source compiles")
}

/// Parses a relation as JSON pairs, `[[0,1],[1,2]]`, into its tape code.
pub fn parse_relation(text: &str) -> Result<TapeRep, ProgramError> {
    let pairs: Vec<(u64, u64)> = serde_json::from_str(text).map_err(|e| ProgramError::Format(e.to_string()))?;
    const LIMIT: u64 = 1 << 12;
    if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= LIMIT || j >= LIMIT) {
        return Err(ProgramError::Format(format!("pair ({i},{j}) is too large to encode")));
    }
    Ok(rel_encode(&pairs.into_iter().collect::<BTreeSet<_>>()))
}
