use cubeavg_core::group::translation_defect;
use cubeavg_core::{Anchor, Element, FolnerFamily, GroupModel, Side, Sidedness};
use proptest::prelude::*;

fn el(v: &[i64]) -> Element {
    Element(v.to_vec())
}

#[test]
fn folner_sets_of_builtin_families() {
    assert_eq!(GroupModel::integers().folner_set(3).unwrap(), vec![el(&[0]), el(&[1]), el(&[2])]);
    assert_eq!(GroupModel::cyclic(5).folner_set(7).unwrap().len(), 5);
    let z2 = GroupModel::lattice(2).folner_set(2).unwrap();
    assert_eq!(z2.len(), 4);
    for p in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        assert!(z2.contains(&el(&p)));
    }
}

#[test]
fn defect_examples() {
    let z = GroupModel::integers();
    assert!((z.folner_defect(10, &el(&[1]), Side::Left).unwrap() - 0.2).abs() < 1e-15);
    let g = GroupModel::cyclic(6);
    for x in g.folner_set(1).unwrap() {
        assert_eq!(g.folner_defect(3, &x, Side::Left).unwrap(), 0.0);
        assert_eq!(g.folner_defect(3, &x, Side::Right).unwrap(), 0.0);
    }
}

#[test]
fn heisenberg_defect_matches_enumeration() {
    let h = GroupModel::heisenberg();
    let set = h.folner_set(8).unwrap();
    let x = el(&[1, 0, 0]);
    let moved: std::collections::HashSet<Element> = set.iter().map(|s| h.multiply(&x, s)).collect();
    let original: std::collections::HashSet<Element> = set.iter().cloned().collect();
    let sym = moved.symmetric_difference(&original).count();
    let expected = sym as f64 / set.len() as f64;
    assert!((h.folner_defect(8, &x, Side::Left).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn heisenberg_is_noncommutative() {
    let h = GroupModel::heisenberg();
    let (x, y) = (el(&[1, 0, 0]), el(&[0, 1, 0]));
    assert_ne!(h.multiply(&x, &y), h.multiply(&y, &x));
    let g = el(&[2, -3, 5]);
    assert_eq!(h.multiply(&g, &h.inverse(&g)), h.identity());
}

#[test]
fn builtin_families_contain_the_identity() {
    for model in [GroupModel::integers(), GroupModel::lattice(3), GroupModel::heisenberg(), GroupModel::cyclic(4)] {
        for n in 1..=4 {
            assert!(model.folner_set(n).unwrap().contains(&model.identity()), "{}", model.describe());
        }
    }
}

#[test]
fn explicit_families_keep_declared_sidedness() {
    let z = GroupModel::integers();
    let sets = vec![vec![el(&[0])], vec![el(&[0]), el(&[1])]];
    let m = z.with_family(FolnerFamily::Explicit(sets), Sidedness::Left).unwrap();
    assert_eq!(m.sidedness(), Sidedness::Left);
    assert!(m.folner_set(3).is_err());
    assert!(z.with_family(FolnerFamily::Explicit(vec![vec![el(&[0]), el(&[0])]]), Sidedness::Left).is_err());
}

fn doubling_is_monotone(model: &GroupModel, generators: &[Element], max: usize) {
    for g in generators {
        let mut n = 1;
        while 2 * n <= max {
            for side in [Side::Left, Side::Right] {
                let a = model.folner_defect(n, g, side).unwrap();
                let b = model.folner_defect(2 * n, g, side).unwrap();
                assert!(b <= a + 1e-12, "{} at N={n}, g={g}: {a} then {b}", model.describe());
            }
            n *= 2;
        }
    }
}

#[test]
fn defects_shrink_along_doubling() {
    doubling_is_monotone(&GroupModel::integers(), &GroupModel::integers().generators(), 256);
    doubling_is_monotone(&GroupModel::lattice(2), &GroupModel::lattice(2).generators(), 64);
    let h = GroupModel::heisenberg();
    doubling_is_monotone(&h, &h.generators(), 8);
    let drift = GroupModel::integers()
        .with_family(FolnerFamily::Boxes(Anchor::Linear { slope: vec![1] }), Sidedness::TwoSided)
        .unwrap();
    doubling_is_monotone(&drift, &drift.generators(), 256);
}

proptest! {
    #[test]
    fn left_defect_equals_right_defect_of_inverse_on_inverse_family(
        n in 1usize..=3,
        a in -3i64..=3,
        b in -3i64..=3,
        c in -6i64..=6,
    ) {
        let h = GroupModel::heisenberg();
        let set = h.folner_set(n).unwrap();
        let inverted: Vec<Element> = set.iter().map(|s| h.inverse(s)).collect();
        let g = el(&[a, b, c]);
        let left = translation_defect(&h, &set, &g, Side::Left);
        let right = translation_defect(&h, &inverted, &h.inverse(&g), Side::Right);
        prop_assert!((left - right).abs() < 1e-15);
    }

    #[test]
    fn heisenberg_multiplication_is_associative(
        x in prop::array::uniform3(-5i64..=5),
        y in prop::array::uniform3(-5i64..=5),
        z in prop::array::uniform3(-5i64..=5),
    ) {
        let h = GroupModel::heisenberg();
        let (x, y, z) = (el(&x), el(&y), el(&z));
        prop_assert_eq!(h.multiply(&h.multiply(&x, &y), &z), h.multiply(&x, &h.multiply(&y, &z)));
    }
}
