use std::path::PathBuf;
use std::process::{Command, Output};

use ellis_kit::report::parse_record;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellis-kit"))
        .args(args)
        .env("ELLISKIT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_system(name: &str, src: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ellis-kit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{name}.dsk"));
    std::fs::write(&path, src).unwrap();
    path
}

#[test]
fn iterate_prints_the_class_value() {
    let o = run(&["iterate", "--system", "builtin:swap2", "--point", "A(3)", "--class", "2k+1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "f^(2k+1)(A(3)) = B()"), "{}", stdout(&o));
}

#[test]
fn validate_accepts_a_positional_system() {
    let o = run(&["validate", "builtin:swap2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid: total, deterministic (exact)"));
}

#[test]
fn ellis_flags_unbounded_periods() {
    let o = run(&["ellis", "--system", "builtin:omega3_cantor", "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("classify=CANTOR_FLAG (unbounded periods, witness period n+2)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn continuity_records_in_lines_format() {
    let o = run(&[
        "continuity", "--system", "builtin:omega3_transitive", "--point", "D(0)", "--class", "2k+0", "--format", "lines",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "continuity.D(0).2k+0=DISCONTINUOUS"), "{out}");
    assert!(out.lines().any(|l| l == "continuity.D(0).2k+0.limit=D()"), "{out}");
}

#[test]
fn report_lines_parse_as_records() {
    let o = run(&["report", "builtin:swap2", "--format", "lines"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let records: Vec<(&str, &str)> = out.lines().map(|l| parse_record(l).expect(l)).collect();
    assert_eq!(records[0], ("system", "swap2"));
    assert!(records.contains(&("classify", "HOMEO_TO_X")));
    assert!(records.iter().filter(|(k, _)| k.starts_with("expect.")).all(|(_, v)| *v == "ok"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["report", "builtin:collapse2", "--format", "lines"][..],
        &["report", "builtin:marcher"][..],
        &["orbit", "builtin:omega3_transitive", "--point", "D(0,0,0)"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn every_builtin_self_test_passes() {
    for name in ["swap2", "collapse2", "collapse2b", "marcher", "descender", "fixedline", "constant"] {
        let o = run(&["report", &format!("builtin:{name}"), "--format", "lines"]);
        assert_eq!(o.status.code(), Some(0), "{name}\n{}", stdout(&o));
        assert!(!stdout(&o).contains("MISMATCH"), "{name}");
    }
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(run(&["validate", "builtin:nope"]).status.code(), Some(1));
    assert_eq!(run(&["iterate", "builtin:swap2", "--point", "A(", "--class", "2k+1"]).status.code(), Some(1));
    assert_eq!(run(&["iterate", "builtin:swap2", "--point", "A(3)", "--class", "2q"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "/nonexistent/system.dsk"]).status.code(), Some(1));
}

#[test]
fn preconditions_exit_two() {
    let o = run(&["continuity", "builtin:swap2", "--point", "A(3)", "--class", "2k+0"]);
    assert_eq!(o.status.code(), Some(2));
    let gap = write_system("gap", "system gap\nspace { tree A height 1 }\nrules {\n  rule A() -> A()\n  rule A(n | n >= 1) -> A(0)\n}\n");
    let o = run(&["orbit", gap.to_str().unwrap(), "--point", "A(1)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_verdicts_exit_three() {
    let gap = write_system("gap3", "system gap\nspace { tree A height 1 }\nrules {\n  rule A() -> A()\n  rule A(n | n >= 1) -> A(0)\n}\n");
    let o = run(&["validate", gap.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("coverage gap at A(0)"));

    let wrong = write_system(
        "wrong",
        "system wrong ordered\nspace { tree A height 1  tree B height 1 }\nrules {\n  rule A() -> B()\n  rule B() -> A()\n  rule A(n) -> B(n)\n  rule B(n) -> A(n+1)\n}\nexpect { transitive = false }\n",
    );
    let o = run(&["report", wrong.to_str().unwrap(), "--format", "lines"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("expect.transitive=MISMATCH"), "{}", stdout(&o));
}
