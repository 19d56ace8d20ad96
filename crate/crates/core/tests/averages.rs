mod common;

use common::{observable, perm, rng, rotation, swap_system, z_range};
use cubeavg_core::random::{seeded_system, RandomSystemConfig, ValueRange};
use cubeavg_core::{
    cube_average, cube_average_at, cube_average_limit, iterated_limit_check, khintchine_bound_check,
    khintchine_chain, return_set, Anchor, CubeAverageRequest, Element, FiniteSystem, FolnerFamily, GroupModel,
    IteratedStatus, Observable, Perm, Sidedness,
};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn constant_one_averages_to_one() {
    let sys = seeded_system(1, &RandomSystemConfig::new(2, 6, 6));
    let one = Observable::constant(sys.len(), 1.0);
    let a = cube_average(&CubeAverageRequest::uniform(&sys, &one, 2, vec![1]), 1).unwrap();
    assert!(a.values.iter().all(|v| close(*v, 1.0)));
}

#[test]
fn d1_finite_group_is_f_times_projection() {
    let sys = seeded_system(4, &RandomSystemConfig::new(1, 6, 6));
    let f = observable(&mut rng(4), &sys, ValueRange::Signed);
    let a = cube_average(&CubeAverageRequest::uniform(&sys, &f, 1, vec![1]), 1).unwrap();
    let want = f.mul(&sys.cond_expect(&f, &sys.invariant_partition(&[0]).unwrap()));
    assert!(sys.l2_distance(&a, &want) <= 1e-12);
}

#[test]
fn two_swaps_give_one_eighth() {
    let sys = swap_system(2);
    let f = Observable::indicator(2, &[0]);
    let r = cube_average_limit(&CubeAverageRequest::uniform(&sys, &f, 2, vec![1])).unwrap();
    assert!(close(r.integral, 0.125));
    assert!(r.exact && r.converged);
}

#[test]
fn identity_actions_give_the_pointwise_product() {
    let sys = FiniteSystem::uniform(3, GroupModel::integers(), vec![vec![Perm::identity(3)]; 2]).unwrap();
    let mut r = rng(2);
    let fs: Vec<Observable> = (0..4).map(|_| observable(&mut r, &sys, ValueRange::Signed)).collect();
    let prod = fs.iter().skip(1).fold(fs[0].clone(), |acc, f| acc.mul(f));
    let rep = cube_average_limit(&CubeAverageRequest::new(&sys, fs.clone(), vec![1, 2, 4])).unwrap();
    for (a, b) in rep.limit.iter().zip(&prod.values) {
        assert!(close(*a, *b));
    }
    let it = iterated_limit_check(&CubeAverageRequest::new(&sys, fs, vec![1, 2])).unwrap();
    assert!(close(it.j, sys.integral(&prod)) && close(it.j_prime, sys.integral(&prod)));
}

#[test]
fn integer_boxes_on_a_five_cycle() {
    let sys = rotation(5, 1, GroupModel::integers());
    let f = Observable::indicator(5, &[0]);
    let schedule: Vec<usize> = (0..6).map(|k| 500 << k).collect();
    let r = cube_average_limit(&CubeAverageRequest::uniform(&sys, &f, 1, schedule)).unwrap();
    assert!(close(r.integral, 1.0 / 25.0));
    assert!(r.converged && r.cross_check.unwrap() <= 1e-12);
}

#[test]
fn limits_do_not_depend_on_the_box_anchor() {
    let sys = rotation(6, 1, GroupModel::integers());
    let f = Observable::new("f", vec![0.9, 0.1, 0.4, 0.0, 1.0, 0.3]);
    let drift = GroupModel::integers()
        .with_family(FolnerFamily::Boxes(Anchor::Fixed { offset: vec![-37] }), Sidedness::TwoSided)
        .unwrap();
    let schedule: Vec<usize> = (0..4).map(|k| 6000 << k).collect();
    let base = CubeAverageRequest::uniform(&sys, &f, 1, schedule.clone());
    let mut moved = base.clone();
    moved.families = vec![drift];
    let a = cube_average_limit(&base).unwrap();
    let b = cube_average_limit(&moved).unwrap();
    assert!((a.integral - b.integral).abs() <= 1e-4);
    assert!(a.cross_check.unwrap() <= 1e-4);
    for ((x, y), w) in a.limit.iter().zip(&b.limit).zip(sys.weights()) {
        assert!(w * (x - y).abs() <= 1e-4);
    }
}

#[test]
fn finite_group_averages_are_already_exact() {
    let sys = seeded_system(9, &RandomSystemConfig::new(2, 6, 6));
    let mut r = rng(9);
    let fs: Vec<Observable> = (0..4).map(|_| observable(&mut r, &sys, ValueRange::Signed)).collect();
    let req = CubeAverageRequest::new(&sys, fs, vec![1]);
    let once = cube_average(&req, 1).unwrap();
    for n in [2, 7] {
        assert_eq!(cube_average(&req, n).unwrap().values, once.values);
        assert_eq!(cube_average_at(&req, &[1, n]).unwrap().values, once.values);
    }
}

#[test]
fn one_sided_families_produce_a_warning() {
    let sys = rotation(3, 1, GroupModel::integers());
    let sets: Vec<Vec<Element>> = (1..=8).map(|n| z_range(0, 3 * n as i64)).collect();
    let fam = GroupModel::integers().with_family(FolnerFamily::Explicit(sets), Sidedness::Left).unwrap();
    let f = Observable::indicator(3, &[1]);
    let mut req = CubeAverageRequest::uniform(&sys, &f, 1, vec![1, 2, 4, 8]);
    req.families = vec![fam];
    let r = cube_average_limit(&req).unwrap();
    assert_eq!(r.warnings.len(), 1);
    assert!(close(r.integral, 1.0 / 9.0));
}

#[test]
fn khintchine_examples() {
    let swap = swap_system(1);
    let r = khintchine_bound_check(&swap, &Observable::indicator(2, &[0]), &[swap.group().clone()], &[1]).unwrap();
    assert!(r.passed && close(r.integral, 0.25) && close(r.power, 0.25));

    let sys = seeded_system(3, &RandomSystemConfig::new(2, 6, 6));
    let c = Observable::constant(sys.len(), 0.6);
    let r = khintchine_bound_check(&sys, &c, &vec![sys.group().clone(); 2], &[1]).unwrap();
    assert!(r.passed && close(r.integral, 0.6f64.powi(4)));

    let id = FiniteSystem::uniform(4, GroupModel::cyclic(2), vec![vec![Perm::identity(4)]; 2]).unwrap();
    let f = Observable::new("f", vec![0.0, 1.0, 0.5, 0.5]);
    let r = khintchine_bound_check(&id, &f, &vec![id.group().clone(); 2], &[1]).unwrap();
    assert!(r.passed && r.integral > r.power + 1e-3);

    let neg = Observable::new("n", vec![-0.1, 0.2, 0.0, 0.0]);
    assert!(khintchine_bound_check(&id, &neg, &[id.group().clone()], &[1]).is_err());
}

#[test]
fn return_set_examples() {
    let swap = swap_system(1);
    let f = Observable::indicator(2, &[0]);
    let window = vec![vec![Element(vec![0]), Element(vec![1])]];
    let r = return_set(&swap, &f, 0.3, &window).unwrap();
    assert_eq!(r.members.len(), 2);
    assert!(close(r.values[0], 0.5) && close(r.values[1], 0.0));

    let rot = rotation(6, 1, GroupModel::integers());
    let one = Observable::constant(6, 1.0);
    let all = return_set(&rot, &one, 1e-3, &[z_range(-5, 20)]).unwrap();
    assert_eq!(all.members.len(), 25);
    assert_eq!(all.largest_gap, 0);

    let g = Observable::indicator(6, &[0, 1]);
    let some = return_set(&rot, &g, 0.05, &[z_range(0, 30)]).unwrap();
    assert!(some.members.contains(&vec![Element(vec![0])]));
}

#[test]
fn chain_steps_are_squares_of_projections() {
    let sys = seeded_system(21, &RandomSystemConfig::new(2, 6, 6));
    let f = observable(&mut rng(21), &sys, ValueRange::Unit);
    let chain = khintchine_chain(&sys, &f, 2).unwrap();
    let p = sys.cond_expect(&f, &sys.invariant_partition(&[0]).unwrap());
    assert!(close(chain[1], sys.integral(&p.mul(&p))));
}

#[test]
fn invalid_requests_are_rejected() {
    let sys = swap_system(1);
    let f = Observable::indicator(2, &[0]);
    assert!(cube_average_limit(&CubeAverageRequest::uniform(&sys, &f, 2, vec![1])).is_err());
    assert!(cube_average_limit(&CubeAverageRequest::uniform(&sys, &f, 1, vec![2, 1])).is_err());
    let inf = Observable::new("inf", vec![f64::INFINITY, 0.0]);
    assert!(cube_average(&CubeAverageRequest::uniform(&sys, &inf, 1, vec![1]), 1).is_err());
    let short = Observable::new("short", vec![1.0]);
    assert!(cube_average(&CubeAverageRequest::uniform(&sys, &short, 1, vec![1]), 1).is_err());
    let wrong = FiniteSystem::uniform(2, GroupModel::cyclic(2), vec![vec![perm(&[1, 0])]]).unwrap();
    let mut req = CubeAverageRequest::uniform(&wrong, &f, 1, vec![1]);
    req.families = vec![GroupModel::integers()];
    assert!(cube_average(&req, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn khintchine_bound(seed in 0u64..1_000_000, d in 1usize..=3) {
        let sys = seeded_system(seed, &RandomSystemConfig::new(d, 6, 6));
        let f = observable(&mut rng(seed), &sys, ValueRange::Unit);
        let r = khintchine_bound_check(&sys, &f, &vec![sys.group().clone(); d], &[1]).unwrap();
        prop_assert!(r.passed && r.chain_holds);
    }

    #[test]
    fn joint_and_iterated_limits_agree(seed in 0u64..1_000_000, d in 1usize..=3) {
        let sys = seeded_system(seed, &RandomSystemConfig::new(d, 6, 6));
        let mut r = rng(seed);
        let fs: Vec<Observable> = (0..1 << d).map(|_| observable(&mut r, &sys, ValueRange::Signed)).collect();
        let rep = iterated_limit_check(&CubeAverageRequest::new(&sys, fs, vec![1])).unwrap();
        prop_assert_eq!(rep.status, IteratedStatus::Passed);
        prop_assert!(rep.difference <= 1e-10);
    }
}
