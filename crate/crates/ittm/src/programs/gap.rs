//! A host-level look for gaps among halting stages.

use super::ProgramError;
use crate::engine::{self, BudgetKind, Budgets, Outcome};
use crate::machine::Program;
use crate::ordinal::Ordinal;
use crate::tape::TapeRep;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    /// Least stage above the smallest halting stage at which none of the
    /// programs halts, or `None` when no program halted.
    pub stage: Option<Ordinal>,
    /// Indices of the programs that halted, in order.
    pub halted_set: Vec<usize>,
    /// Halting stage per program, `None` when it did not halt.
    pub stages: Vec<Option<Ordinal>>,
    /// Programs whose run ran out of budget, with the budget that ran out.
    pub exhausted: Vec<(usize, BudgetKind)>,
}

/// Runs every program on blank input and returns the least stage, above the
/// least halting stage, at which none of them halts.
pub fn gap_probe(programs: &[Program], budgets: &Budgets) -> Result<GapReport, ProgramError> {
    if programs.is_empty() {
        return Err(ProgramError::Empty("gap probe needs at least one program".into()));
    }
    let mut report = GapReport { stage: None, halted_set: Vec::new(), stages: Vec::new(), exhausted: Vec::new() };
    for (i, p) in programs.iter().enumerate() {
        let out = engine::run(p, &TapeRep::zeros(), budgets, None).map_err(|e| ProgramError::Format(format!("program {i}: {e}")))?;
        let stage = match out {
            Outcome::Halted { stage, .. } => {
                report.halted_set.push(i);
                Some(stage)
            }
            Outcome::BudgetExceeded { which, .. } => {
                report.exhausted.push((i, which));
                None
            }
            Outcome::Diverges { .. } => None,
        };
        report.stages.push(stage);
    }
    let halting: Vec<&Ordinal> = report.stages.iter().flatten().collect();
    if let Some(&min) = halting.iter().min() {
        let mut s = min.succ();
        while halting.contains(&&s) {
            s = s.succ();
        }
        report.stage = Some(s);
    }
    Ok(report)
}

/// The first `n` programs of the sample enumeration used by the gap probe:
/// clocks for a fixed list of stages, then clocks for `w*k + k`.
pub fn gap_samples(n: usize) -> Vec<Program> {
    const FIXED: [&str; 8] = ["5", "w", "w+3", "3", "w*2", "w^2", "w+1", "0"];
    (0..n)
        .map(|i| {
            let alpha = match FIXED.get(i) {
                Some(a) => a.parse().expect("literal"),
                None => {
                    let k = (i - FIXED.len() + 3) as u64;
                    Ordinal::omega().mul(&Ordinal::nat(k)).add_nat(k)
                }
            };
            super::gen_clock(&alpha).expect("sample clock")
        })
        .collect()
}
