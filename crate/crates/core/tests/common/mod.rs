#![allow(dead_code)]

use cubeavg_core::random::{random_observable, ValueRange};
use cubeavg_core::{Element, FiniteSystem, GroupModel, Observable, Perm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn perm(images: &[u32]) -> Perm {
    Perm::from_images(images.to_vec()).expect("a permutation")
}

/// Uniform `{a, b}` with `Z/2` acting by the swap on each of `d` actions.
pub fn swap_system(d: usize) -> FiniteSystem {
    FiniteSystem::new(
        vec!["a".into(), "b".into()],
        vec![0.5, 0.5],
        GroupModel::cyclic(2),
        vec![vec![perm(&[1, 0])]; d],
    )
    .unwrap()
}

/// Uniform `Z/n` rotated by `step`, one action.
pub fn rotation(n: usize, step: usize, group: GroupModel) -> FiniteSystem {
    let images: Vec<u32> = (0..n).map(|x| ((x + step) % n) as u32).collect();
    FiniteSystem::uniform(n, group, vec![vec![perm(&images)]]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn observable(rng: &mut ChaCha8Rng, system: &FiniteSystem, range: ValueRange) -> Observable {
    random_observable(rng, system.len(), range, "f")
}

/// Nonempty subsets of `0..d`, as sorted index lists.
pub fn subsets(d: usize) -> Vec<Vec<usize>> {
    (1..1usize << d).map(|m| (0..d).filter(|i| m >> i & 1 == 1).collect()).collect()
}

pub fn z_range(lo: i64, hi: i64) -> Vec<Element> {
    (lo..hi).map(|v| Element(vec![v])).collect()
}

pub fn l2(system: &FiniteSystem, f: &Observable, g: &Observable) -> f64 {
    system.l2_distance(f, g)
}
