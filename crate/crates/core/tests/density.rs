mod common;

use common::z_range;
use cubeavg_core::density::{window_file, Boundary};
use cubeavg_core::{
    correspondence_system, cube_count, cube_points, density, good_shift_set, syndeticity_probe, CountMethod,
    CubePattern, Element, GroupModel, Orientation, ProductGroupModel, SubsetWindow,
};
use proptest::prelude::*;

fn el(v: i64) -> Element {
    Element(vec![v])
}

#[test]
fn density_examples() {
    let full = SubsetWindow::lattice_from_fn(&[0, 0], &[20, 20], |_| true).unwrap();
    assert_eq!(density(&full, 10).unwrap(), 1.0);
    let empty = SubsetWindow::lattice_from_fn(&[0, 0], &[20, 20], |_| false).unwrap();
    assert_eq!(density(&empty, 10).unwrap(), 0.0);
    let even = SubsetWindow::lattice_from_fn(&[0, 0], &[100, 100], |x| x[0] % 2 == 0 && x[1] % 2 == 0).unwrap();
    for n in [2, 10, 64, 100] {
        assert_eq!(density(&even, n).unwrap(), 0.25);
    }
    assert!(density(&even, 101).is_err());
}

#[test]
fn cube_point_examples() {
    let z2 = ProductGroupModel::power(GroupModel::integers(), 2).unwrap();
    let pts = cube_points(&z2, &CubePattern::left(vec![el(1), el(1)]), &[el(5), el(5)]).unwrap();
    assert_eq!(pts, vec![vec![el(5), el(5)], vec![el(4), el(5)], vec![el(5), el(4)], vec![el(4), el(4)]]);
    let same = cube_points(&z2, &CubePattern::left(vec![el(0), el(0)]), &[el(2), el(3)]).unwrap();
    assert!(same.iter().all(|p| p == &vec![el(2), el(3)]));
    let z5 = ProductGroupModel::power(GroupModel::cyclic(5), 1).unwrap();
    let mod5 = cube_points(&z5, &CubePattern::left(vec![el(2)]), &[el(1)]).unwrap();
    assert_eq!(mod5, vec![vec![el(1)], vec![el(4)]]);
}

#[test]
fn count_examples() {
    let full = SubsetWindow::lattice_from_fn(&[0, 0], &[4, 4], |_| true).unwrap();
    let h = CubePattern::left(vec![el(1), el(1)]);
    for m in [CountMethod::Brute, CountMethod::Fast] {
        assert_eq!(cube_count(&full, &h, m).unwrap().count, 9);
    }
    let empty = SubsetWindow::lattice_from_fn(&[0, 0], &[4, 4], |_| false).unwrap();
    assert_eq!(cube_count(&empty, &h, CountMethod::Fast).unwrap().count, 0);
    let e = SubsetWindow::random_lattice(&[0, 0], &[30, 20], 0.4, 5).unwrap();
    let zero = cube_count(&e, &CubePattern::left(vec![el(0), el(0)]), CountMethod::Fast).unwrap();
    assert_eq!(zero.count as usize, e.members());
}

#[test]
fn non_lattice_windows_use_the_generic_path() {
    let z6 = ProductGroupModel::power(GroupModel::cyclic(6), 2).unwrap();
    let axes = vec![(0..6).map(el).collect::<Vec<_>>(); 2];
    let mask: Vec<bool> = (0..36).map(|p| (p / 6 + p % 6) % 3 != 0).collect();
    let w = SubsetWindow::new(z6, axes, mask.clone()).unwrap();
    let rolled = SubsetWindow::lattice_box(&[0, 0], &[6, 6], mask).unwrap().with_boundary(Boundary::Toroidal).unwrap();
    for h in [[1, 2], [0, 5], [3, 3]] {
        let pattern = CubePattern::left(vec![el(h[0]), el(h[1])]);
        let a = cube_count(&w, &pattern, CountMethod::Brute).unwrap();
        let b = cube_count(&rolled, &pattern, CountMethod::Fast).unwrap();
        assert_eq!(a, b);
    }
    assert!(cube_count(&w, &CubePattern::left(vec![el(1), el(1)]), CountMethod::Fast).is_err());
}

#[test]
fn good_shift_examples() {
    let full = SubsetWindow::lattice_from_fn(&[0, 0], &[32, 32], |_| true).unwrap();
    let window = vec![z_range(0, 8), z_range(0, 8)];
    let r = good_shift_set(&full, 0.01, &window, 32, Orientation::Left).unwrap();
    assert_eq!(r.fraction, 1.0);
    let e = SubsetWindow::random_lattice(&[0, 0], &[32, 32], 0.3, 8).unwrap();
    let r = good_shift_set(&e, 1.0, &window, 32, Orientation::Right).unwrap();
    assert_eq!(r.fraction, 1.0);
    let r = good_shift_set(&e, 0.001, &window, 32, Orientation::Left).unwrap();
    assert!(r.members.contains(&vec![el(0), el(0)]));
}

#[test]
fn syndeticity_examples() {
    let full = SubsetWindow::lattice_from_fn(&[0, 0], &[10, 10], |_| true).unwrap();
    assert!(syndeticity_probe(&full, &[vec![1, 1]]).unwrap().probes[0].all_met);
    let empty = SubsetWindow::lattice_from_fn(&[0, 0], &[10, 10], |_| false).unwrap();
    assert_eq!(syndeticity_probe(&empty, &[vec![3, 3]]).unwrap().probes[0].met, 0);
    let lattice = SubsetWindow::lattice_from_fn(&[0, 0], &[30, 30], |x| x[0] % 3 == 0 && x[1] % 3 == 0).unwrap();
    let r = syndeticity_probe(&lattice, &[vec![2, 2], vec![3, 3]]).unwrap();
    assert!(!r.probes[0].all_met && r.probes[1].all_met);
    assert_eq!(r.minimal_box, Some(vec![3, 3]));
}

#[test]
fn correspondence_of_the_even_integers() {
    let even = SubsetWindow::lattice_from_fn(&[0], &[1000], |x| x[0] % 2 == 0).unwrap();
    let c = correspondence_system(&even, 1, 900).unwrap();
    assert_eq!(c.system.len(), 2);
    assert!(c.system.weights().iter().all(|w| *w == 0.5));
    assert_eq!(c.set_a.len(), 1);
    assert_eq!(c.weight_a, 0.5);
    assert!(c.is_measure_preserving());
    let check = c.intersection_check(&[vec![0], vec![2]]).unwrap();
    assert!(check.passed && (check.measure - 0.5).abs() < 1e-12);
    let odd = c.intersection_check(&[vec![0], vec![1]]).unwrap();
    assert_eq!(odd.measure, 0.0);
}

#[test]
fn correspondence_of_the_full_window() {
    let full = SubsetWindow::lattice_from_fn(&[0, 0], &[12, 12], |_| true).unwrap();
    let c = correspondence_system(&full, 2, 12).unwrap();
    assert_eq!(c.system.len(), 1);
    assert_eq!(c.weight_a, 1.0);
}

#[test]
fn window_files_round_trip() {
    let w = SubsetWindow::random_lattice(&[4, -2, 0], &[5, 6, 7], 0.5, 3)
        .unwrap()
        .with_boundary(Boundary::Toroidal)
        .unwrap();
    let back = window_file::parse(&window_file::render(&w).unwrap()).unwrap();
    assert_eq!(back.mask(), w.mask());
    assert_eq!(back.boundary(), Boundary::Toroidal);
    assert_eq!(back.lattice_frame(), w.lattice_frame());
}

fn window_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<i64>, f64, u64, bool)> {
    (2usize..=3)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(1usize..=40, d),
                prop::collection::vec(-10i64..10, d),
                0.3f64..0.95,
                any::<u64>(),
                any::<bool>(),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn fast_count_equals_brute_count(
        (extents, origin, p, seed, toroidal) in window_strategy(),
        h in prop::collection::vec(-45i64..45, 3),
        right in any::<bool>(),
    ) {
        let d = extents.len();
        let boundary = if toroidal { Boundary::Toroidal } else { Boundary::Open };
        let w = SubsetWindow::random_lattice(&origin, &extents, p, seed).unwrap().with_boundary(boundary).unwrap();
        let h: Vec<Element> = h[..d].iter().map(|&v| el(v)).collect();
        let pattern = if right { CubePattern::right(h) } else { CubePattern::left(h) };
        let fast = cube_count(&w, &pattern, CountMethod::Fast).unwrap();
        let brute = cube_count(&w, &pattern, CountMethod::Brute).unwrap();
        prop_assert_eq!(fast, brute);
    }

    #[test]
    fn toroidal_counts_are_shift_invariant(seed in any::<u64>(), s in 0usize..24, h in -5i64..5) {
        let w = SubsetWindow::random_lattice(&[0, 0], &[24, 16], 0.5, seed).unwrap();
        let rolled = SubsetWindow::lattice_from_fn(&[0, 0], &[24, 16], |x| {
            w.mask()[((x[0] as usize + s) % 24) * 16 + x[1] as usize]
        })
        .unwrap();
        let pattern = CubePattern::left(vec![el(h), el(2)]);
        let a = cube_count(&w.clone().with_boundary(Boundary::Toroidal).unwrap(), &pattern, CountMethod::Fast).unwrap();
        let b = cube_count(&rolled.with_boundary(Boundary::Toroidal).unwrap(), &pattern, CountMethod::Fast).unwrap();
        prop_assert_eq!(a.count, b.count);
    }

    #[test]
    fn density_is_translation_consistent(seed in any::<u64>(), gx in -6i64..=6, gy in -6i64..=6, n in 8usize..=40) {
        let e = SubsetWindow::random_lattice(&[-10, -10], &[60, 60], 0.5, seed).unwrap();
        let moved = SubsetWindow::lattice_from_fn(&[-10, -10], &[60, 60], |x| {
            e.contains(&[el(x[0] - gx), el(x[1] - gy)]).unwrap_or(false)
        })
        .unwrap();
        let boundary = GroupModel::lattice(2).folner_defect(n, &Element(vec![gx, gy]), cubeavg_core::Side::Left).unwrap();
        let diff = (density(&e, n).unwrap() - density(&moved, n).unwrap()).abs();
        prop_assert!(diff <= boundary + 1e-12);
    }

    #[test]
    fn periodic_correspondence_is_exact(pattern in prop::collection::vec(any::<bool>(), 1..=12), reps in 3usize..12, r in 0usize..3) {
        let p = pattern.len();
        let n = p * reps;
        prop_assume!(2 * r < n);
        let e = SubsetWindow::lattice_from_fn(&[0], &[n], |x| pattern[x[0] as usize % p]).unwrap();
        let c = correspondence_system(&e, r, n).unwrap();
        let want = pattern.iter().filter(|&&b| b).count() as f64 / p as f64;
        prop_assert!(c.is_measure_preserving());
        prop_assert!((c.weight_a - want).abs() <= 1e-12);
        prop_assert!(c.system.len() <= p);
    }

    #[test]
    fn aperiodic_boundary_error_is_bounded(seed in any::<u64>(), d in 1usize..=2, n in 10usize..40, r in 0usize..4) {
        let e = SubsetWindow::random_lattice(&vec![0; d], &vec![n; d], 0.5, seed).unwrap();
        let c = correspondence_system(&e, r, n).unwrap();
        prop_assert!(c.boundary_error <= 2.0 * (r * d) as f64 / n as f64 + 1e-15);
        prop_assert!((c.weight_a - c.density).abs() <= 1e-12);
    }
}
