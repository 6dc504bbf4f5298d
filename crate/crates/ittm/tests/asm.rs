use ittm::asm::{self, Instr};
use ittm::engine::{self, Budgets, Outcome};
use ittm::machine::{self, Move, Program, Snapshot, StepResult};
use ittm::{Ordinal, TapeRep};
use proptest::prelude::*;

fn build(text: &str) -> Program {
    let p = asm::compile(&asm::parse(text).unwrap()).unwrap();
    assert!(p.validate().is_empty());
    p
}

fn run(p: &Program, input: &TapeRep) -> Outcome {
    engine::run(p, input, &Budgets::default(), None).unwrap()
}

fn halted(o: &Outcome) -> (String, TapeRep) {
    match o {
        Outcome::Halted { stage, output } => (stage.to_string(), output.clone()),
        other => panic!("expected a halt, got {other:?}"),
    }
}

#[test]
fn parses_single_halt() {
    let u = asm::parse("main: halt").unwrap();
    assert_eq!(u.routines.len(), 1);
    assert_eq!(u.routines[0].body.len(), 1);
    assert_eq!(u.routines[0].body[0].0, Instr::Halt);
}

#[test]
fn unresolved_target_reports_position() {
    let e = asm::parse("main:\n  move R\n  goto missing\n").unwrap_err();
    assert_eq!((e.line, e.col), (3, 3));
    assert!(e.msg.contains("missing"));
}

#[test]
fn syntax_errors_carry_positions() {
    let e = asm::parse("main:\n  move Q\n").unwrap_err();
    assert_eq!((e.line, e.col), (2, 8));
    let e = asm::parse("main:\n  A: move R\n  A: halt\n").unwrap_err();
    assert_eq!(e.line, 3);
    assert!(e.msg.contains("duplicate label"));
    assert!(asm::parse("helper: halt").unwrap_err().msg.contains("main"));
    assert!(asm::parse("main: call nowhere").is_err());
    assert!(asm::parse("main: write (1,2,0)").is_err());
}

#[test]
fn wildcard_pattern() {
    let u = asm::parse("main:\n  on (1,_,_) goto L\n  L: halt").unwrap();
    assert_eq!(u.routines[0].body[0].0, Instr::On([Some(1), None, None], "L".into()));
}

#[test]
fn printed_unit_parses_back() {
    let text = "main: onlimit D\n  call f\n  L: on (_,1,_) goto D; move R\n  goto L\n  D: write (_,_,1)\nf:\n  write (0,1,_)\n";
    let u = asm::parse(text).unwrap();
    let again = asm::parse(&u.to_string()).unwrap();
    assert_eq!(again.to_string(), u.to_string());
    assert_eq!(asm::compile(&again).unwrap(), asm::compile(&u).unwrap());
}

#[test]
fn halt_only_halts_at_zero() {
    let (stage, _) = halted(&run(&build("main: halt"), &TapeRep::zeros()));
    assert_eq!(stage, "0");
}

#[test]
fn clock_omega_example() {
    let p = build("main: onlimit DONE; LOOP: goto LOOP; DONE: halt");
    let (stage, _) = halted(&run(&p, &TapeRep::zeros()));
    assert_eq!(stage, "w");
}

#[test]
fn calls_are_inlined_per_site() {
    let one = build("main:\n  call f\nf:\n  move R\n  write (_,_,1)\n");
    let two = build("main:\n  call f\n  call f\nf:\n  move R\n  write (_,_,1)\n");
    let fam = |p: &Program, tag: &str| p.states().iter().filter(|s| s.contains(tag)).cloned().collect::<Vec<_>>();
    let a = fam(&two, "/f@0.");
    let b = fam(&two, "/f@1.");
    assert_eq!(a.len(), 2);
    assert_eq!(b.len(), 2);
    assert!(a.iter().all(|s| !b.contains(s)));
    assert_eq!(two.states().len(), one.states().len() + 2);
    let (stage, out) = halted(&run(&two, &TapeRep::zeros()));
    assert_eq!(stage, "3");
    assert_eq!(out.cells(3), vec![0, 1, 1]);
}

#[test]
fn recursion_is_rejected() {
    let u = asm::parse("main: call a\na: call b\nb: call a\n").unwrap();
    let e = asm::compile(&u).unwrap_err();
    assert!(e.msg.contains("recursive"));
    assert_eq!(e.line, 3);
}

#[test]
fn compile_is_deterministic() {
    let text = "main: onlimit D\n  call f\n  L: on (_,1,_) goto D; move R\n  goto L\n  D: write (_,_,1)\nf:\n  write (0,1,_)\n  call g\ng:\n  move R\n";
    let a = build(text);
    let b = build(text);
    assert_eq!(a, b);
    assert_eq!(a.to_text(), b.to_text());
}

#[test]
fn pure_control_loop_becomes_idle() {
    let p = build("main:\n  A: goto B\n  B: goto A\n");
    match run(&p, &TapeRep::zeros()) {
        Outcome::Diverges { certificate } => assert!(engine::verify_certificate(&p, &certificate)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn nested_handler_then_outer_handler() {
    let text = "\
main:
  onlimit OUTER
  call sub
  write (_,_,1)
  halt
  OUTER: halt
sub:
  onlimit INNER
  LOOP: goto LOOP
  INNER: move R
  write (_,_,1)
";
    let p = build(text);
    // sub wakes at w through its own handler; the return costs two steps to
    // restore the mode field before main writes and halts.
    let (stage, out) = halted(&run(&p, &TapeRep::zeros()));
    assert_eq!(stage, "w+4");
    assert_eq!(out.cells(3), vec![0, 1, 0]);

    let text = "\
main:
  onlimit OUTER
  call sub
  LOOP: goto LOOP
  OUTER: move R
  write (_,_,1)
sub:
  onlimit INNER
  move S
  goto END
  INNER: halt
  END:
";
    let p = build(text);
    // sub returns before any limit, so the first limit goes to OUTER.
    let (stage, out) = halted(&run(&p, &TapeRep::zeros()));
    assert_eq!(stage, "w+1");
    assert_eq!(out.cells(3), vec![0, 1, 0]);
}

#[test]
fn mode_switch_needs_known_head() {
    let text = "\
main:
  onlimit A
  L: on (1,_,_) goto X
  move R
  goto L
  X: call sub
  A: halt
sub:
  onlimit B
  move S
  B: halt
";
    let e = asm::compile(&asm::parse(text).unwrap()).unwrap_err();
    assert!(e.msg.contains("head position"), "{e}");
}

#[derive(Clone, Debug)]
enum Op {
    Write([Option<u8>; 3]),
    Move(Move),
}

fn op() -> impl Strategy<Value = Op> {
    let bit = prop::option::of(0u8..2);
    prop_oneof![
        [bit.clone(), bit.clone(), bit].prop_map(Op::Write),
        prop_oneof![Just(Move::L), Just(Move::R), Just(Move::S)].prop_map(Op::Move),
    ]
}

fn text_of(ops: &[Op]) -> String {
    let mut s = String::from("main:\n");
    for o in ops {
        match o {
            Op::Write(p) => {
                let b: Vec<String> = p.iter().map(|b| b.map_or("_".into(), |b| b.to_string())).collect();
                s += &format!("  write ({})\n", b.join(","));
            }
            Op::Move(m) => s += &format!("  move {}\n", m.letter()),
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn straight_line_code(ops in prop::collection::vec(op(), 1..=5), input in prop::collection::vec(0u8..2, 0..6)) {
        let p = build(&text_of(&ops));
        let mut cells: [Vec<u8>; 3] = [input.clone(), vec![], vec![]];
        for c in cells.iter_mut() {
            c.resize(16, 0);
        }
        let mut head = 0usize;
        let mut snap = Snapshot::initial(TapeRep::from_cells(&input), false);
        for (k, o) in ops.iter().enumerate() {
            match o {
                Op::Write(pat) => {
                    for t in 0..3 {
                        if let Some(b) = pat[t] {
                            cells[t][head] = b;
                        }
                    }
                }
                Op::Move(Move::L) => head = head.saturating_sub(1),
                Op::Move(Move::R) => head += 1,
                Op::Move(Move::S) => {}
            }
            let last = k + 1 == ops.len();
            snap = match machine::step(&p, &snap).unwrap() {
                StepResult::Next(s) => { prop_assert!(!last); s }
                StepResult::Halted(s) => { prop_assert!(last); s }
            };
            prop_assert_eq!(snap.head, head);
            let tapes = [&snap.input, &snap.scratch, &snap.output];
            for t in 0..3 {
                prop_assert_eq!(tapes[t].cells(16), cells[t].clone());
            }
        }
        let (stage, out) = halted(&run(&p, &TapeRep::from_cells(&input)));
        // The halting transition is the last step, taken at stage k-1.
        prop_assert_eq!(stage, Ordinal::nat(ops.len() as u64 - 1).to_string());
        prop_assert_eq!(out.cells(16), cells[2].clone());
    }
}
