use std::path::Path;
use std::process::{Command, Output};

fn ittm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ittm")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CLOCK_W: &str = "main:\n  onlimit E\n  A: move R\n  goto A\n  E: halt\n";

#[test]
fn asm_writes_program_and_reports_errors() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("w.asm"), CLOCK_W).unwrap();
    let o = ittm(&["asm", "w.asm", "-o", "w.ittm"], d.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(d.path().join("w.ittm")).unwrap();
    assert!(ittm::Program::parse(&text).is_ok());

    std::fs::write(d.path().join("bad.asm"), "main:\n  move R\n  goto NOWHERE\n").unwrap();
    let o = ittm(&["asm", "bad.asm"], d.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("3:"));

    assert_eq!(code(&ittm(&["asm", "missing.asm"], d.path())), 1);
}

#[test]
fn run_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("w.asm"), CLOCK_W).unwrap();
    std::fs::write(d.path().join("idle.asm"), "main:\n  L: goto L\n").unwrap();
    // Writes a growing unary counter; no short repeating pattern.
    std::fs::write(
        d.path().join("count.asm"),
        "main:\n  A: on (_,1,_) goto N\n  write (_,1,_)\n  B: on (_,0,_) goto C\n  move L\n  goto B\n  C: move S\n  goto A\n  N: move R\n  goto A\n",
    )
    .unwrap();
    let o = ittm(&["run", "w.asm"], d.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("halted at w\n"));
    let o = ittm(&["run", "idle.asm"], d.path());
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("diverges"));
    let o = ittm(&["run", "--max-block-steps", "50", "count.asm"], d.path());
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("budget: block_steps at"));
    assert_eq!(code(&ittm(&["run", "--input", "nonsense", "w.asm"], d.path())), 2);
}

#[test]
fn clock_verify() {
    let d = tempfile::tempdir().unwrap();
    for a in ["w", "w^2", "w*2+3"] {
        assert_eq!(code(&ittm(&["clock", "--ordinal", a, "--verify"], d.path())), 0, "{a}");
    }
    assert_eq!(code(&ittm(&["clock", "--ordinal", "w^9", "--verify"], d.path())), 2);
    assert_eq!(code(&ittm(&["clock", "--ordinal", "w+2", "--emit", "c.ittm"], d.path())), 0);
    assert_eq!(code(&ittm(&["run", "c.ittm"], d.path())), 0);
}

#[test]
fn wo_and_gap() {
    let d = tempfile::tempdir().unwrap();
    let o = ittm(&["wo", "--relation", "[[0,1],[1,2],[0,2]]"], d.path());
    assert_eq!((code(&o), stdout(&o).trim()), (0, "1"));
    let o = ittm(&["wo", "--relation", "[[0,1],[1,0]]"], d.path());
    assert_eq!((code(&o), stdout(&o).trim()), (5, "0"));
    assert_eq!(code(&ittm(&["wo", "--relation", "[[0,1"], d.path())), 2);
    let o = ittm(&["gap", "--count", "1"], d.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "gap at 6\n0\thalted at 5\n");
}

#[test]
fn json_and_trace_are_deterministic() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("w.asm"), CLOCK_W).unwrap();
    let a = ittm(&["run", "--json", "--trace", "a.jsonl", "w.asm"], d.path());
    let b = ittm(&["run", "--json", "--trace", "b.jsonl", "w.asm"], d.path());
    assert_eq!(a.stdout, b.stdout);
    let ta = std::fs::read(d.path().join("a.jsonl")).unwrap();
    assert_eq!(ta, std::fs::read(d.path().join("b.jsonl")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"], "halted");
    assert_eq!(v["stage"], "w");
}
