//! Infinite time Turing machines: ordinal stages, eventually periodic tapes,
//! a transfinite executor, an assembler and a library of machines.

pub mod asm;
pub mod programs;
pub mod engine;
pub mod machine;
pub mod ordinal;
pub mod tape;

pub use engine::{Budgets, Outcome};
pub use machine::{Move, Program, Snapshot};
pub use ordinal::Ordinal;
pub use tape::{ChangeMask, TapeRep};
