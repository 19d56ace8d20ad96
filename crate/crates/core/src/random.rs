//! Seeded random finite systems with commuting actions of a small finite group.
//!
//! A system is a disjoint union of components, each carrying all `d` actions:
//!
//! * a product of coset spaces `G/K_1 × … × G/K_d`, action `i` multiplying
//!   the `i`-th factor on the left;
//! * `G` itself with one action by left multiplication and another by right
//!   multiplication with the inverse, all other actions trivial;
//! * for abelian `G`, `G` with action `i` given by `x ↦ g^{a_i} x`.
//!
//! Each component gets a random mass spread uniformly over its points, and the
//! points are shuffled.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{FiniteGroup, GroupModel};
use crate::perm::Perm;
use crate::system::{FiniteSystem, Observable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomSystemConfig {
    pub d: usize,
    pub max_points: usize,
    pub max_group_order: usize,
}

impl RandomSystemConfig {
    pub fn new(d: usize, max_points: usize, max_group_order: usize) -> RandomSystemConfig {
        RandomSystemConfig { d, max_points, max_group_order }
    }
}

/// `Z/2 … Z/6`, the Klein group and `S3`.
pub fn small_groups() -> Vec<FiniteGroup> {
    let mut out: Vec<FiniteGroup> = (2..=6).map(FiniteGroup::cyclic).collect();
    out.push(FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2)));
    out.push(FiniteGroup::symmetric3());
    out
}

/// Point count and, per action and generator of `G`, the image array.
struct Component {
    size: usize,
    // maps[i][s][x]
    maps: Vec<Vec<Vec<usize>>>,
}

fn left_cosets(g: &FiniteGroup, k: &[usize]) -> (Vec<usize>, usize) {
    let mut coset_of = vec![usize::MAX; g.order()];
    let mut count = 0;
    for x in 0..g.order() {
        if coset_of[x] == usize::MAX {
            for &h in k {
                coset_of[g.multiply(x, h)] = count;
            }
            count += 1;
        }
    }
    (coset_of, count)
}

fn coset_product(rng: &mut impl Rng, g: &FiniteGroup, d: usize, budget: usize) -> Component {
    let subgroups = g.small_subgroups();
    let mut factors = Vec::with_capacity(d);
    let mut size = 1;
    for _ in 0..d {
        let fitting: Vec<&Vec<usize>> =
            subgroups.iter().filter(|k| size * (g.order() / k.len()) <= budget).collect();
        let k = fitting.choose(rng).expect("the whole group always fits");
        let (coset_of, count) = left_cosets(g, k);
        // generator s sends coset c to the coset of s·x for any x in c
        let rep: Vec<usize> = (0..count).map(|c| coset_of.iter().position(|&y| y == c).unwrap()).collect();
        let images: Vec<Vec<usize>> = g
            .generators()
            .iter()
            .map(|&s| rep.iter().map(|&x| coset_of[g.multiply(s, x)]).collect())
            .collect();
        factors.push((count, images));
        size *= count;
    }
    let strides: Vec<usize> = (0..d).map(|i| factors[i + 1..].iter().map(|f| f.0).product()).collect();
    let maps = (0..d)
        .map(|i| {
            factors[i]
                .1
                .iter()
                .map(|img| {
                    (0..size)
                        .map(|x| {
                            let c = x / strides[i] % factors[i].0;
                            x + (img[c] * strides[i]) - c * strides[i]
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Component { size, maps }
}

fn bimodule(rng: &mut impl Rng, g: &FiniteGroup, d: usize) -> Component {
    let n = g.order();
    let mut axes: Vec<usize> = (0..d).collect();
    axes.shuffle(rng);
    let (left, right) = (axes[0], axes.get(1).copied());
    let maps = (0..d)
        .map(|i| {
            g.generators()
                .iter()
                .map(|&s| {
                    (0..n)
                        .map(|x| {
                            if i == left {
                                g.multiply(s, x)
                            } else if Some(i) == right {
                                g.multiply(x, g.inverse(s))
                            } else {
                                x
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Component { size: n, maps }
}

fn diagonal(rng: &mut impl Rng, g: &FiniteGroup, d: usize) -> Component {
    let n = g.order();
    let power = |x: usize, a: usize| (0..a).fold(g.identity(), |acc, _| g.multiply(acc, x));
    let maps = (0..d)
        .map(|_| {
            let a = rng.gen_range(0..n);
            g.generators()
                .iter()
                .map(|&s| (0..n).map(|x| g.multiply(power(s, a), x)).collect())
                .collect()
        })
        .collect();
    Component { size: n, maps }
}

/// A random system drawn from `rng`; always valid by construction.
pub fn random_system(rng: &mut impl Rng, cfg: &RandomSystemConfig) -> FiniteSystem {
    assert!(cfg.max_points >= 1 && cfg.max_group_order >= 2);
    let groups: Vec<FiniteGroup> = small_groups().into_iter().filter(|g| g.order() <= cfg.max_group_order).collect();
    let g = groups.choose(rng).expect("at least Z/2 is available").clone();
    let d = cfg.d;
    let mut components: Vec<Component> = Vec::new();
    let mut used = 0;
    loop {
        let budget = cfg.max_points - used;
        let mut kinds = vec![0];
        if g.order() <= budget && d >= 1 {
            kinds.push(1);
            if g.is_abelian() {
                kinds.push(2);
            }
        }
        let c = match kinds.choose(rng).unwrap() {
            0 => coset_product(rng, &g, d, budget),
            1 => bimodule(rng, &g, d),
            _ => diagonal(rng, &g, d),
        };
        used += c.size;
        components.push(c);
        if used >= cfg.max_points || rng.gen_bool(0.5) {
            break;
        }
    }

    let n = used;
    let masses: Vec<f64> = components.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = masses.iter().sum();
    let mut weights = Vec::with_capacity(n);
    for (c, m) in components.iter().zip(&masses) {
        weights.extend(std::iter::repeat_n(m / total / c.size as f64, c.size));
    }
    let mut shuffle: Vec<usize> = (0..n).collect();
    shuffle.shuffle(rng);

    let mut shuffled_weights = vec![0.0; n];
    for (x, w) in weights.iter().enumerate() {
        shuffled_weights[shuffle[x]] = *w;
    }
    let actions: Vec<Vec<Perm>> = (0..d)
        .map(|i| {
            (0..g.generators().len())
                .map(|s| {
                    let mut images = vec![0u32; n];
                    let mut offset = 0;
                    for c in &components {
                        for x in 0..c.size {
                            images[shuffle[offset + x]] = shuffle[offset + c.maps[i][s][x]] as u32;
                        }
                        offset += c.size;
                    }
                    Perm::from_images(images).expect("component maps are bijections")
                })
                .collect()
        })
        .collect();
    let labels = (0..n).map(|x| format!("p{x}")).collect();
    FiniteSystem::new(labels, shuffled_weights, GroupModel::finite(g), actions)
        .expect("random systems satisfy the system invariants")
}

pub fn seeded_system(seed: u64, cfg: &RandomSystemConfig) -> FiniteSystem {
    random_system(&mut ChaCha8Rng::seed_from_u64(seed), cfg)
}

/// Values drawn from the range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueRange {
    /// Uniform in `[-1, 1]`.
    Signed,
    /// Uniform in `[0, 1]`.
    Unit,
    /// `±1` with equal probability.
    Sign,
}

pub fn random_observable(rng: &mut impl Rng, n: usize, range: ValueRange, name: &str) -> Observable {
    let values = (0..n)
        .map(|_| match range {
            ValueRange::Signed => rng.gen_range(-1.0..=1.0),
            ValueRange::Unit => rng.gen_range(0.0..=1.0),
            ValueRange::Sign => {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();
    Observable::new(name, values)
}
