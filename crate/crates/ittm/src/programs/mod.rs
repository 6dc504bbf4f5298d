//! Machines built from the assembler: ordinal clocks, deciders that run an
//! embedded classical machine, the count-through well-order decider, and a
//! host-level gap probe.

mod classical;
mod clock;
mod gap;
mod wo;

use thiserror::Error;

use crate::asm::AsmError;

pub use classical::{embed_classical, exists_decider, gen_halt_decider, ClassicalTM, Halting, Transition};
pub use clock::{clock_source, gen_clock, gen_clock_depth, MAX_FINITE, MAX_PHASES};
pub use gap::{gap_probe, gap_samples, GapReport};
pub use wo::{parse_relation, wo_decider, wo_source};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("generated assembly failed to build: {0}")]
    Asm(AsmError),
    #[error("bad machine description: {0}")]
    Format(String),
    #[error("{0}")]
    Empty(String),
}
