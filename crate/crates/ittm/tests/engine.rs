use ittm::engine::{self, BlockResult, Budgets, EventKind, Outcome, Pattern, Verbosity};
use ittm::machine::{self, Move, Program, Snapshot};
use ittm::{Ordinal, TapeRep};

/// Fills every row of `state` from `f(read) -> (write, move, next)`.
fn rows(p: &mut Program, state: &str, f: impl Fn(u8) -> (u8, Move, &'static str)) {
    for r in 0..1u8 << p.arity() {
        let (w, m, n) = f(r);
        p.set(state, r, w, m, n);
    }
}

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn t(s: &str) -> TapeRep {
    s.parse().unwrap()
}

fn idle(p: &mut Program, state: &'static str) {
    rows(p, state, move |r| (r, Move::S, state));
}

fn run(p: &Program) -> Outcome {
    engine::run(p, &TapeRep::zeros(), &Budgets::default(), None).unwrap()
}

fn clock_omega() -> Program {
    let mut p = Program::new(&[], 3);
    idle(&mut p, "start");
    rows(&mut p, "limit", |r| (r, Move::S, "halt"));
    p
}

fn idle_program() -> Program {
    let mut p = Program::new(&[], 3);
    idle(&mut p, "start");
    idle(&mut p, "limit");
    p
}

#[test]
fn immediate_halt() {
    let mut p = Program::new(&[], 3);
    rows(&mut p, "start", |r| (r, Move::S, "halt"));
    idle(&mut p, "limit");
    assert_eq!(run(&p), Outcome::Halted { stage: Ordinal::zero(), output: t(";0") });
    let (_, ev) = engine::trace(&p, &TapeRep::zeros(), &Budgets::default(), Verbosity::Full, None).unwrap();
    assert_eq!(ev.len(), 1);
    assert_eq!((ev[0].kind, ev[0].stage.clone()), (EventKind::Halt, Ordinal::zero()));
}

#[test]
fn clock_omega_halts_at_omega() {
    let p = clock_omega();
    assert_eq!(run(&p), Outcome::Halted { stage: o("w"), output: t(";0") });
    let (_, ev) = engine::trace(&p, &TapeRep::zeros(), &Budgets::default(), Verbosity::Quiet, None).unwrap();
    let kinds: Vec<_> = ev.iter().map(|e| (e.kind, e.stage.to_string())).collect();
    assert_eq!(kinds, vec![(EventKind::BlockLimit, "w".into()), (EventKind::Halt, "w".into())]);
}

#[test]
fn idle_diverges_with_checkable_certificate() {
    let p = idle_program();
    let Outcome::Diverges { certificate: c } = run(&p) else { panic!("expected divergence") };
    assert!(engine::verify_certificate(&p, &c));

    let mut flipped = c.clone();
    flipped.interval_masks[1] = flipped.interval_masks[1].write(0, 1);
    assert!(!engine::verify_certificate(&p, &flipped));

    let mut altered = c.clone();
    altered.snapshot.scratch = altered.snapshot.scratch.write(0, 1);
    assert!(!engine::verify_certificate(&p, &altered));

    let (_, ev) = engine::trace(&p, &TapeRep::zeros(), &Budgets::default(), Verbosity::Full, None).unwrap();
    assert_eq!(ev.first().unwrap().kind, EventKind::BlockLimit);
    assert_eq!(ev.last().unwrap().kind, EventKind::Loop);
}

#[test]
fn right_sweeper_drifts_to_all_ones() {
    let mut p = Program::new(&[], 3);
    rows(&mut p, "start", |r| (r | 0b010, Move::R, "start"));
    rows(&mut p, "limit", |r| (r, Move::S, "halt"));
    let start = Snapshot::initial(TapeRep::zeros(), false);
    let BlockResult::Limit { snapshot, detection, .. } = engine::block_advance(&p, &start, 100_000, None).unwrap() else {
        panic!("expected a limit")
    };
    assert_eq!(detection.pattern, Pattern::Drift);
    assert_eq!(detection.shift, 1);
    assert_eq!(snapshot.scratch, t(";1"));
    assert_eq!((snapshot.state.as_str(), snapshot.head), (machine::LIMIT, 0));
    assert_eq!(run(&p), Outcome::Halted { stage: o("w"), output: t(";0") });
}

#[test]
fn flag_flasher_limit_is_one() {
    let mut p = Program::new(&[], 3);
    rows(&mut p, "start", |r| (r ^ 0b010, Move::S, "start"));
    idle(&mut p, "limit");
    let start = Snapshot::initial(TapeRep::zeros(), false);
    let BlockResult::Limit { snapshot, detection, masks } = engine::block_advance(&p, &start, 1000, None).unwrap() else {
        panic!("expected a limit")
    };
    assert_eq!(detection.pattern, Pattern::Cycle);
    assert_eq!(snapshot.scratch, t("1;0"));
    assert_eq!(masks[1], t("1;0"));
}

/// Flashes scratch cell 0 at every limit; halts at the first limit that sees it set.
fn clock_omega_squared() -> Program {
    let mut p = Program::new(&["off"], 3);
    idle(&mut p, "start");
    rows(&mut p, "limit", |r| if r & 0b010 != 0 { (r, Move::S, "halt") } else { (r | 0b010, Move::S, "off") });
    rows(&mut p, "off", |r| (r & !0b010, Move::S, "start"));
    p
}

#[test]
fn clock_omega_squared_halts_at_omega_squared() {
    assert_eq!(run(&clock_omega_squared()), Outcome::Halted { stage: o("w^2"), output: t(";0") });
}

#[test]
fn stages_increase_and_limits_reset() {
    for p in [clock_omega(), idle_program(), clock_omega_squared()] {
        let (_, ev) = engine::trace(&p, &TapeRep::zeros(), &Budgets::default(), Verbosity::Detailed, None).unwrap();
        for w in ev.windows(2) {
            let terminal = w[1].kind == EventKind::Halt;
            assert!(w[0].stage < w[1].stage || (terminal && w[0].stage == w[1].stage), "{:?}", w);
        }
        for e in &ev {
            if matches!(e.kind, EventKind::BlockLimit | EventKind::LevelLimit) {
                assert_eq!((e.snapshot.state.as_str(), e.snapshot.head), (machine::LIMIT, 0));
            }
        }
    }
}

fn oracle_program(write_first: bool) -> Program {
    let mut p = Program::new(&["query", "yes", "no", "ask"], 4);
    if write_first {
        rows(&mut p, "start", |r| (r | 1, Move::S, "ask"));
    } else {
        rows(&mut p, "start", |r| (r, Move::S, "query"));
    }
    rows(&mut p, "ask", |r| (r, Move::S, "query"));
    rows(&mut p, "yes", |r| (r | 0b0010, Move::S, "halt"));
    rows(&mut p, "no", |r| (r & !0b0010, Move::S, "halt"));
    idle(&mut p, "limit");
    p
}

#[test]
fn oracle_queries() {
    let zeros = |t: &TapeRep| -> Result<bool, String> { Ok(t.is_zero()) };
    let b = Budgets::default();
    let out = engine::run(&oracle_program(false), &TapeRep::zeros(), &b, Some(&zeros)).unwrap();
    assert_eq!(out, Outcome::Halted { stage: o("1"), output: t("1;0") });
    let out = engine::run(&oracle_program(true), &TapeRep::zeros(), &b, Some(&zeros)).unwrap();
    assert_eq!(out, Outcome::Halted { stage: o("2"), output: t(";0") });
    let err = engine::run(&oracle_program(false), &TapeRep::zeros(), &b, None).unwrap_err();
    assert_eq!(err, engine::EngineError::NoOracle);
    let failing = |_: &TapeRep| -> Result<bool, String> { Err("down".into()) };
    let err = engine::run(&oracle_program(false), &TapeRep::zeros(), &b, Some(&failing)).unwrap_err();
    assert_eq!(err, engine::EngineError::Oracle("down".into()));
}

#[test]
fn outcome_json() {
    assert_eq!(run(&clock_omega()).to_json(), r#"{"result":"halted","stage":"w","output":";0"}"#);
    let mut p = Program::new(&[], 3);
    rows(&mut p, "start", |r| (r, Move::R, "start"));
    idle(&mut p, "limit");
    let b = Budgets { max_block_steps: 50, ..Budgets::default() };
    // Moving right over blank cells is a drift, so a budget needs a non-periodic block.
    let out = engine::run(&p, &TapeRep::zeros(), &b, None).unwrap();
    assert!(matches!(out, Outcome::Diverges { .. } | Outcome::Halted { .. } | Outcome::BudgetExceeded { .. }));
}
