mod common;

use common::{from_indices, progression_limit, pt, triangular};
use ellis_kit::dsl::apply_map;
use ellis_kit::dsl::builtins::builtin;
use ellis_kit::ellis::{homeomorphism_check, is_transitive, EllisParams, HomeoVerdict, TransitivityVerdict};
use ellis_kit::orbit::{analyze_orbit, omega_limit, OrbitAnalysis, OrbitBounds};
use ellis_kit::piterate::{
    class_iterate, continuity_at, progression_oracle, t39_sufficient, ContinuityMode, ResidueClass, SampleBounds,
    T39Verdict,
};
use ellis_kit::space::{enumerate_truncation, EscapeFamily, Point, Slot};

fn value(name: &str, x: &Point, modulus: u64, residue: u64) -> Point {
    let s = builtin(name).unwrap();
    let v = class_iterate(&s, x, ResidueClass::new(modulus, residue).unwrap(), OrbitBounds::default()).unwrap();
    v.single().unwrap_or_else(|| panic!("{name}: f^p({x}) not constant on {modulus}k+{residue}")).clone()
}

fn mod2(l: u64) -> ContinuityMode {
    ContinuityMode::Class(ResidueClass::new(2, l).unwrap())
}

#[test]
fn swap_values_by_parity() {
    for n in 0..=50 {
        assert_eq!(value("swap2", &pt("A", &[n]), 2, 0), pt("A", &[]));
        assert_eq!(value("swap2", &pt("B", &[n]), 2, 0), pt("B", &[]));
        assert_eq!(value("swap2", &pt("A", &[n]), 2, 1), pt("B", &[]));
        assert_eq!(value("swap2", &pt("B", &[n]), 2, 1), pt("A", &[]));
    }
}

#[test]
fn swap_values_agree_with_hand_limits() {
    for n in 0..=20 {
        for x in [pt("A", &[n]), pt("B", &[n])] {
            for l in 0..2 {
                assert_eq!(value("swap2", &x, 2, l), progression_limit(common::swap2, &x, 2, l, 200));
            }
        }
    }
}

#[test]
fn swap_iterates_are_continuous_at_the_tops() {
    let s = builtin("swap2").unwrap();
    for top in [pt("A", &[]), pt("B", &[])] {
        for l in 0..2 {
            let v = continuity_at(&s, mod2(l), &top, SampleBounds::default()).unwrap();
            assert!(v.is_continuous(), "{top} class 2k+{l}: {v:?}");
        }
    }
}

#[test]
fn collapse_sends_isolated_points_to_the_fixed_point() {
    let s = builtin("collapse2").unwrap();
    for x in enumerate_truncation(&s.space, 51).into_iter().filter(|p| p.depth() == 1) {
        assert_eq!(value("collapse2", &x, 1, 0), pt("A", &[0]), "{x}");
        assert_eq!(progression_limit(common::collapse2, &x, 1, 0, 400), pt("A", &[0]));
    }
}

#[test]
fn collapse_iterates_jump_at_the_tops() {
    let s = builtin("collapse2").unwrap();
    for top in [pt("A", &[]), pt("B", &[])] {
        for l in 0..2 {
            let v = continuity_at(&s, mod2(l), &top, SampleBounds::default()).unwrap();
            assert!(v.is_discontinuous(), "{top} class 2k+{l}: {v:?}");
        }
    }
    let fam = EscapeFamily::new("A", vec![Slot::Divergent]).unwrap();
    let v = t39_sufficient(&s, &pt("A", &[]), &pt("A", &[0]), &fam, SampleBounds::default()).unwrap();
    assert_eq!(v, T39Verdict::DiscontinuousAll);
}

#[test]
fn variant_values_follow_the_orbit() {
    let s = builtin("collapse2b").unwrap();
    for n in 0..=10 {
        for x in [pt("A", &[n]), pt("B", &[n])] {
            for l in 0..2 {
                let c = ResidueClass::new(2, l).unwrap();
                let got = value("collapse2b", &x, 2, l);
                assert_eq!(got, progression_limit(common::collapse2b, &x, 2, l, 200), "{x} 2k+{l}");
                assert!(progression_oracle(&s, &x, c, &got, 15, 10_000).unwrap(), "{x} 2k+{l}");
            }
        }
    }
}

#[test]
fn variant_even_class_at_a1_is_the_top() {
    // a_1 → b_0 → a_0 → b → a → b → ...
    assert_eq!(value("collapse2b", &pt("A", &[1]), 2, 0), pt("A", &[]));
    assert_eq!(value("collapse2b", &pt("A", &[1]), 2, 1), pt("B", &[]));
}

fn d(ix: &[u64]) -> Point {
    from_indices(ix)
}

fn c(n: u64) -> u64 {
    2 + 3 * n
}

#[test]
fn dense_orbit_diagram() {
    let s = builtin("omega3_transitive").unwrap();
    let diagram: &[&[u64]] = &[
        &[0, 0, 0], &[0, 0, 2], &[0, 0, 1], &[0, 4, 0], &[0, 1, 0], &[0, 3, 0], &[0, 2, 0], &[1, 0, 0],
        &[0, 0, 3], &[0, 1, 2], &[1, 0, 2], &[0, 1, 1], &[1, 0, 1], &[0, 7, 0], &[1, 4, 0], &[1, 1, 0],
        &[1, 3, 0], &[0, 6, 0], &[0, 5, 0], &[1, 2, 0], &[2, 0, 0], &[0, 0, 4], &[0, 1, 3], &[1, 0, 3],
        &[0, 2, 2], &[1, 1, 2], &[2, 0, 2], &[0, 2, 1], &[1, 1, 1], &[2, 0, 1], &[0, 10, 0], &[1, 7, 0],
        &[2, 4, 0], &[2, 1, 0], &[2, 3, 0], &[1, 6, 0], &[0, 9, 0], &[0, 8, 0], &[1, 5, 0], &[2, 2, 0],
        &[3, 0, 0],
    ];
    for w in diagram.windows(2) {
        assert_eq!(apply_map(&s, &d(w[0])).unwrap(), d(w[1]), "after d{:?}", w[0]);
    }
}

#[test]
fn dense_orbit_iterate_identities() {
    let classes = [(1, 0), (2, 0), (2, 1), (3, 2), (6, 5)];
    let top = d(&[]);
    for &(m, l) in &classes {
        let v = |ix: &[u64]| value("omega3_transitive", &d(ix), m, l);
        assert_eq!(v(&[]), top);
        for n in 0..=6 {
            assert_eq!(v(&[n]), d(&[n]));
        }
        assert_eq!(v(&[0, 0]), top);
        assert_eq!(v(&[2, 0]), top);
        assert_eq!(v(&[0, 1]), d(&[0]));
        for n in 1..=4 {
            assert_eq!(v(&[c(n), 0]), top);
        }
        for n in 0..=4 {
            assert_eq!(v(&[c(n) + 1, 0]), d(&[0]));
            if n > 0 {
                assert_eq!(v(&[c(n) - 1, 0]), d(&[0]));
            }
        }
        for j in 1..=6 {
            for k in 1..=6 {
                assert_eq!(v(&[j, k]), d(&[k - 1]), "d_{{{j},{k}}}");
            }
        }
    }
}

#[test]
fn dense_orbit_limits_agree_with_hand_map() {
    for ix in [vec![1, 0], vec![3, 0], vec![4, 0], vec![5, 0], vec![2, 3], vec![0, 2]] {
        let x = d(&ix);
        for (m, l) in [(1, 0), (2, 1), (3, 0)] {
            assert_eq!(
                value("omega3_transitive", &x, m, l),
                progression_limit(common::dense, &x, m, l, 80),
                "d{ix:?} class {m}k+{l}"
            );
        }
    }
}

#[test]
fn dense_orbit_is_transitive_with_singleton_omega_limits() {
    let s = builtin("omega3_transitive").unwrap();
    match is_transitive(&s, 6, OrbitBounds::default()).unwrap() {
        TransitivityVerdict::Transitive { w, .. } => assert_eq!(w, d(&[0, 0, 0])),
        other => panic!("{other}"),
    }
    for x in enumerate_truncation(&s.space, 7).into_iter().filter(|p| p.depth() < 3) {
        assert_eq!(omega_limit(&s, &x, OrbitBounds::default()).unwrap().len(), 1, "{x}");
    }
}

#[test]
fn dense_orbit_semigroup_is_a_copy_of_the_space() {
    let s = builtin("omega3_transitive").unwrap();
    let params = EllisParams {
        depth: 4,
        ..EllisParams::default()
    };
    let v = homeomorphism_check(&s, &d(&[0, 0, 0]), &params).unwrap();
    assert!(matches!(v, HomeoVerdict::Verified { .. }), "{v}");
}

#[test]
fn dense_orbit_iterates_jump_at_level_one_points() {
    let s = builtin("omega3_transitive").unwrap();
    for (m, l) in [(1, 0), (2, 0), (2, 1), (3, 1)] {
        let mode = ContinuityMode::Class(ResidueClass::new(m, l).unwrap());
        let v = continuity_at(&s, mode, &d(&[0]), SampleBounds::default()).unwrap();
        assert!(v.is_discontinuous(), "class {m}k+{l}: {v:?}");
    }
}

#[test]
fn unbounded_periods_on_the_first_level() {
    let s = builtin("omega3_cantor").unwrap();
    for n in 0..=10u64 {
        let x = d(&[triangular(n)]);
        match analyze_orbit(&s, &x, OrbitBounds::default()).unwrap() {
            OrbitAnalysis::Finite { m: 0, n: period, cycle, .. } => {
                assert_eq!(period as u64, n + 2, "{x}");
                let mut y = x.clone();
                for expected in cycle.iter().skip(1).chain(std::iter::once(&x)) {
                    y = common::cantor(&y).unwrap();
                    assert_eq!(&y, expected);
                }
            }
            other => panic!("{x}: {other:?}"),
        }
    }
    let cycle: Vec<Point> = [5, 8, 7, 6, 5].iter().map(|&k| d(&[k])).collect();
    for w in cycle.windows(2) {
        assert_eq!(apply_map(&s, &w[0]).unwrap(), w[1]);
    }
}

#[test]
fn unbounded_periods_second_level_collapses_to_the_top() {
    let s = builtin("omega3_cantor").unwrap();
    let c = ResidueClass::new(1, 0).unwrap();
    for i in 0..=10 {
        let x = d(&[i, 0]);
        let got = class_iterate(&s, &x, c, OrbitBounds::default()).unwrap();
        assert_eq!(got.single(), Some(&d(&[])), "d_{{{i},0}}");
        let mut y = x.clone();
        for _ in 0..200 {
            y = common::cantor(&y).unwrap();
        }
        assert_eq!(y, d(&[]));
    }
    assert_eq!(value("omega3_cantor", &d(&[0]), 2, 0), d(&[0]));
    assert_eq!(value("omega3_cantor", &d(&[0]), 2, 1), d(&[1]));
}
