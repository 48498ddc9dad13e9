mod common;

use std::fmt::Write as _;
use std::path::PathBuf;

use ellis_kit::dsl::builtins::{builtin, names};
use ellis_kit::dsl::apply_map;
use ellis_kit::space::{enumerate_truncation, Point};

const DEPTH: u64 = 21;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"))
}

fn table_points(name: &str) -> Vec<Point> {
    let s = builtin(name).unwrap();
    enumerate_truncation(&s.space, DEPTH)
        .into_iter()
        .filter(|p| common::oracle(name, p).is_some())
        .collect()
}

fn oracle_table(name: &str) -> String {
    let mut out = String::new();
    for p in table_points(name) {
        writeln!(out, "{p} -> {}", common::oracle(name, &p).unwrap()).unwrap();
    }
    out
}

fn read_golden(name: &str) -> Vec<(Point, Point)> {
    let text = std::fs::read_to_string(golden_path(name))
        .unwrap_or_else(|e| panic!("missing golden table for {name}: {e}"));
    text.lines()
        .map(|l| {
            let (x, y) = l.split_once(" -> ").expect("line of the form `x -> y`");
            (Point::parse(x).unwrap(), Point::parse(y).unwrap())
        })
        .collect()
}

#[test]
fn golden_tables_match_hand_oracles() {
    let bless = std::env::var_os("ELLISKIT_BLESS").is_some();
    for name in names() {
        let table = oracle_table(name);
        if bless {
            std::fs::create_dir_all(golden_path(name).parent().unwrap()).unwrap();
            std::fs::write(golden_path(name), &table).unwrap();
        }
        let stored = std::fs::read_to_string(golden_path(name)).unwrap();
        assert_eq!(stored, table, "golden table for {name} drifted from its oracle");
    }
}

#[test]
fn apply_map_matches_golden_tables() {
    for name in names() {
        let s = builtin(name).unwrap();
        let rows = read_golden(name);
        assert!(!rows.is_empty(), "{name}");
        for (x, y) in rows {
            assert_eq!(apply_map(&s, &x).unwrap(), y, "{name} at {x}");
        }
    }
}

#[test]
fn dense_orbit_table_covers_truncation_six() {
    let s = builtin("omega3_transitive").unwrap();
    let rows = read_golden("omega3_transitive");
    for p in enumerate_truncation(&s.space, 7) {
        assert!(rows.iter().any(|(x, _)| *x == p), "{p} missing");
    }
}
