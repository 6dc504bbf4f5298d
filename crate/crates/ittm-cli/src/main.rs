use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use ittm::engine::{self, Budgets, Outcome, TraceEvent, Verbosity};
use ittm::machine::Program;
use ittm::programs::{self, ProgramError};
use ittm::{asm, Ordinal, TapeRep};
use serde_json::json;

const HALTED: u8 = 0;
const IO: u8 = 1;
const USAGE: u8 = 2;
const DIVERGES: u8 = 3;
const BUDGET: u8 = 4;
const REJECT: u8 = 5;

#[derive(Parser)]
#[command(name = "ittm", version, about = "Infinite time Turing machine simulator")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Shared {
    /// Successor steps allowed in one omega-block.
    #[arg(long, global = true, default_value_t = Budgets::default().max_block_steps)]
    max_block_steps: u64,
    /// Largest k such that limits of limits up to w^k are explored.
    #[arg(long, global = true, default_value_t = Budgets::default().max_limit_depth)]
    max_limit_depth: u32,
    /// Limit stages allowed in one run.
    #[arg(long, global = true, default_value_t = Budgets::default().max_limit_events)]
    max_limit_events: u64,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Write trace events as JSON lines to this file.
    #[arg(long, global = true, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// -v: full tapes in traces and events on stderr; -vv: every explored step.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile an assembly file to the .ittm format.
    Asm {
        input: PathBuf,
        /// Output path; standard output if omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a program (.ittm, or .asm compiled on the fly).
    Run {
        program: PathBuf,
        /// Input tape literal, e.g. `101;0`.
        #[arg(long, default_value = ";0")]
        input: String,
    },
    /// Build a clock for an ordinal.
    Clock {
        #[arg(long)]
        ordinal: String,
        /// Write the compiled clock here.
        #[arg(long, value_name = "PATH")]
        emit: Option<PathBuf>,
        /// Run the clock and compare its halting stage with the ordinal.
        #[arg(long)]
        verify: bool,
    },
    /// Decide whether a relation is a well-order.
    Wo {
        /// Relation as JSON pairs, e.g. `[[0,1],[1,2],[0,2]]`.
        #[arg(long, conflicts_with = "tape", required_unless_present = "tape")]
        relation: Option<String>,
        /// Relation code as a tape literal.
        #[arg(long)]
        tape: Option<String>,
    },
    /// Look for a non-halting stage among the sample programs.
    Gap {
        #[arg(long)]
        count: usize,
    },
}

/// A failed command: exit code and message for standard error.
struct Fail(u8, String);

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail(USAGE, e.to_string())
}

fn io(path: &Path, e: std::io::Error) -> Fail {
    Fail(IO, format!("{}: {e}", path.display()))
}

impl Shared {
    fn budgets(&self) -> Budgets {
        Budgets {
            max_block_steps: self.max_block_steps,
            max_limit_depth: self.max_limit_depth,
            max_limit_events: self.max_limit_events,
        }
    }

    fn verbosity(&self) -> Verbosity {
        match self.verbose {
            0 => Verbosity::Quiet,
            1 => Verbosity::Full,
            _ => Verbosity::Detailed,
        }
    }

    /// Runs `p`, writing the trace when asked for.
    fn run(&self, p: &Program, input: &TapeRep) -> Result<Outcome, Fail> {
        if self.trace.is_none() && self.verbose == 0 {
            return engine::run(p, input, &self.budgets(), None).map_err(usage);
        }
        let (out, events) = engine::trace(p, input, &self.budgets(), self.verbosity(), None).map_err(usage)?;
        let full = self.verbose > 0;
        if let Some(path) = &self.trace {
            let mut text = String::new();
            for e in &events {
                text += &e.to_json(full);
                text.push('\n');
            }
            fs::write(path, text).map_err(|e| io(path, e))?;
        }
        if self.verbose > 0 {
            let mut err = std::io::stderr().lock();
            for e in &events {
                let _ = writeln!(err, "{}", summary(e));
            }
        }
        Ok(out)
    }
}

fn summary(e: &TraceEvent) -> String {
    format!("{:?} {} state={} head={}", e.kind, e.stage, e.snapshot.state, e.snapshot.head)
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| io(path, e))
}

fn compile_asm(text: &str) -> Result<Program, Fail> {
    let unit = asm::parse(text).map_err(usage)?;
    asm::compile(&unit).map_err(usage)
}

fn load_program(path: &Path) -> Result<Program, Fail> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "asm") {
        return compile_asm(&text);
    }
    let p = Program::parse(&text).map_err(usage)?;
    let diags = p.validate();
    if let Some(d) = diags.first() {
        return Err(usage(d));
    }
    Ok(p)
}

fn outcome_code(o: &Outcome) -> u8 {
    match o {
        Outcome::Halted { .. } => HALTED,
        Outcome::Diverges { .. } => DIVERGES,
        Outcome::BudgetExceeded { .. } => BUDGET,
    }
}

fn describe(o: &Outcome) -> String {
    match o {
        Outcome::Halted { stage, output } => format!("halted at {stage}\noutput {output}"),
        Outcome::Diverges { certificate: c } => format!(
            "diverges\nloop from {} to {} (level {}), state {} head {}",
            c.start_stage, c.end_stage, c.level, c.snapshot.state, c.snapshot.head
        ),
        Outcome::BudgetExceeded { which, stage } => format!("budget: {} at {stage}", which.name()),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn program_error(e: ProgramError) -> Fail {
    usage(e)
}

fn main_inner(cli: Cli) -> Result<u8, Fail> {
    let sh = &cli.shared;
    match cli.cmd {
        Cmd::Asm { input, out } => {
            let p = compile_asm(&read(&input)?)?;
            write_out(out.as_deref(), &p.to_text())?;
            Ok(HALTED)
        }
        Cmd::Run { program, input } => {
            let tape: TapeRep = input.parse().map_err(usage)?;
            let p = load_program(&program)?;
            let o = sh.run(&p, &tape)?;
            if sh.json {
                println!("{}", o.to_json());
            } else {
                println!("{}", describe(&o));
            }
            Ok(outcome_code(&o))
        }
        Cmd::Clock { ordinal, emit, verify } => {
            let alpha: Ordinal = ordinal.parse().map_err(usage)?;
            let p = programs::gen_clock_depth(&alpha, sh.max_limit_depth).map_err(program_error)?;
            if let Some(path) = &emit {
                fs::write(path, p.to_text()).map_err(|e| io(path, e))?;
            }
            if !verify {
                if emit.is_none() {
                    print!("{}", p.to_text());
                }
                return Ok(HALTED);
            }
            let o = sh.run(&p, &TapeRep::zeros())?;
            let exact = matches!(&o, Outcome::Halted { stage, .. } if *stage == alpha);
            if sh.json {
                println!("{}", json!({"ordinal": alpha.to_string(), "exact": exact, "outcome": serde_json::from_str::<serde_json::Value>(&o.to_json()).expect("json")}));
            } else if exact {
                println!("clock {alpha}: halted at {alpha}");
            } else {
                println!("clock {alpha}: MISMATCH, {}", describe(&o));
            }
            Ok(match outcome_code(&o) {
                HALTED if !exact => REJECT,
                c => c,
            })
        }
        Cmd::Wo { relation, tape } => {
            let code = match (relation, tape) {
                (Some(r), _) => programs::parse_relation(&r).map_err(program_error)?,
                (None, Some(t)) => t.parse().map_err(usage)?,
                (None, None) => return Err(usage("one of --relation or --tape is required")),
            };
            let o = sh.run(&programs::wo_decider(), &code)?;
            let Outcome::Halted { stage, output } = &o else {
                println!("{}", describe(&o));
                return Ok(outcome_code(&o));
            };
            let answer = output.read(0);
            if sh.json {
                println!("{}", json!({"answer": answer, "stage": stage.to_string()}));
            } else {
                println!("{answer}");
            }
            Ok(if answer == 1 { HALTED } else { REJECT })
        }
        Cmd::Gap { count } => {
            let r = programs::gap_probe(&programs::gap_samples(count), &sh.budgets()).map_err(program_error)?;
            if sh.json {
                let rows: Vec<_> = r.stages.iter().map(|s| s.as_ref().map(Ordinal::to_string)).collect();
                let exhausted: Vec<_> = r.exhausted.iter().map(|(i, w)| json!({"index": i, "budget": w.name()})).collect();
                println!(
                    "{}",
                    json!({"stage": r.stage.as_ref().map(Ordinal::to_string), "halted_set": r.halted_set, "stages": rows, "exhausted": exhausted})
                );
            } else {
                match &r.stage {
                    Some(s) => println!("gap at {s}"),
                    None => println!("no program halted"),
                }
                for (i, s) in r.stages.iter().enumerate() {
                    match (s, r.exhausted.iter().find(|(j, _)| *j == i)) {
                        (Some(s), _) => println!("{i}\thalted at {s}"),
                        (None, Some((_, w))) => println!("{i}\tbudget: {}", w.name()),
                        (None, None) => println!("{i}\tdiverges"),
                    }
                }
            }
            Ok(if r.exhausted.is_empty() { HALTED } else { BUDGET })
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
