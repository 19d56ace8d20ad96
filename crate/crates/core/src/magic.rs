//! The magic extension `X*` of a finite system.
//!
//! Points of `X*` are the tuples in `X^{2^d}` of positive `μ^{(1..d)}` weight,
//! `T^(i)*` applies `T^(i)` to the coordinates `ε` with `ε_i = 0` and leaves the
//! rest fixed, and the factor map is projection onto coordinate `𝟎`. The star
//! space is itself a [`FiniteSystem`], so every operation on systems applies.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joining::{box_seminorm, build_joining_bounded, index_set, DEFAULT_MAX_CUBE_DIM};
use crate::perm::Perm;
use crate::system::{FiniteSystem, Observable, Partition};

/// Tolerance of the structure check `|||f − E(f|𝒵*_ε)|||*_ε ≈ 0`.
pub const STRUCTURE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MagicSystem {
    base: FiniteSystem,
    star: FiniteSystem,
    tuples: Vec<Vec<usize>>,
}

pub fn magic_extension(system: &FiniteSystem) -> Result<MagicSystem> {
    magic_extension_bounded(system, DEFAULT_MAX_CUBE_DIM)
}

pub fn magic_extension_bounded(system: &FiniteSystem, max_d: usize) -> Result<MagicSystem> {
    let d = system.d();
    if d == 0 {
        return Err(Error::IndexSequence("the magic extension needs at least one action".into()));
    }
    let order: Vec<usize> = (0..d).collect();
    let joining = build_joining_bounded(system, &order, max_d)?;
    let (tuples, weights): (Vec<Vec<usize>>, Vec<f64>) = joining.entries().unzip();
    let index: HashMap<&[usize], usize> =
        tuples.iter().enumerate().map(|(a, t)| (t.as_slice(), a)).collect();

    let mut actions = Vec::with_capacity(d);
    for i in 0..d {
        let mut gens = Vec::new();
        for p in system.generator_perms(i) {
            let mut images = Vec::with_capacity(tuples.len());
            for t in &tuples {
                let moved: Vec<usize> = t
                    .iter()
                    .enumerate()
                    .map(|(eps, &x)| if eps >> i & 1 == 0 { p.apply(x) } else { x })
                    .collect();
                let &b = index.get(moved.as_slice()).ok_or_else(|| {
                    Error::BrokenJoining(format!("T^({})* maps {t:?} off the support of μ*", i + 1))
                })?;
                images.push(b as u32);
            }
            gens.push(Perm::from_images(images).ok_or_else(|| {
                Error::BrokenJoining(format!("T^({})* is not a bijection of the star support", i + 1))
            })?);
        }
        actions.push(gens);
    }

    let labels = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t.iter().map(|&x| system.labels()[x].as_str()).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let star = FiniteSystem::new(labels, weights, system.group().clone(), actions)?;
    let magic = MagicSystem { base: system.clone(), star, tuples };
    let push = magic.pushforward_defect();
    if push > 1e-12 {
        return Err(Error::BrokenJoining(format!("projection pushes μ* to within {push} of μ only")));
    }
    if let Some(msg) = magic.intertwining_failure() {
        return Err(Error::BrokenJoining(msg));
    }
    Ok(magic)
}

impl MagicSystem {
    pub fn base(&self) -> &FiniteSystem {
        &self.base
    }

    /// `(X*, μ*, T^(i)*)`.
    pub fn star(&self) -> &FiniteSystem {
        &self.star
    }

    /// Base-space tuple of each star point.
    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    /// Projection onto coordinate `𝟎`.
    pub fn project(&self, star_point: usize) -> usize {
        self.tuples[star_point][0]
    }

    /// `f ∘ π` for an observable on the base.
    pub fn lift(&self, f: &Observable) -> Result<Observable> {
        self.base.check_observable(f)?;
        Ok(Observable::new(
            format!("{}∘π", f.name),
            (0..self.star.len()).map(|a| f.values[self.project(a)]).collect(),
        ))
    }

    /// `max_x |π_*μ*(x) − μ(x)|`.
    pub fn pushforward_defect(&self) -> f64 {
        let mut push = vec![0.0; self.base.len()];
        for (a, w) in self.star.weights().iter().enumerate() {
            push[self.project(a)] += w;
        }
        push.iter().zip(self.base.weights()).map(|(p, w)| (p - w).abs()).fold(0.0, f64::max)
    }

    /// `None` when `π ∘ T^(i)* = T^(i) ∘ π` holds for every generator and
    /// star point, else a description of the first failure.
    pub fn intertwining_failure(&self) -> Option<String> {
        for i in 0..self.base.d() {
            let base = self.base.generator_perms(i);
            let star = self.star.generator_perms(i);
            for (s, (p, q)) in base.iter().zip(star).enumerate() {
                for a in 0..self.star.len() {
                    if self.project(q.apply(a)) != p.apply(self.project(a)) {
                        return Some(format!(
                            "generator {s} of action {} fails to intertwine at star point {a}",
                            i + 1
                        ));
                    }
                }
            }
        }
        None
    }

    /// Largest weight change of `μ*` under any star generator.
    pub fn invariance_defect(&self) -> f64 {
        let w = self.star.weights();
        let mut worst: f64 = 0.0;
        for i in 0..self.star.d() {
            for p in self.star.generator_perms(i) {
                for a in 0..w.len() {
                    worst = worst.max((w[p.apply(a)] - w[a]).abs());
                }
            }
        }
        worst
    }
}

/// `𝒵_η`: the common refinement of the invariant partitions `ℐ_i`, `i ∈ η`.
pub fn z_partition(system: &FiniteSystem, eta: &[usize]) -> Result<Partition> {
    let eta = index_set(system, eta)?;
    let mut out = Partition::whole(system.len());
    for i in eta {
        out = out.join(&system.invariant_partition(&[i])?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureReport {
    pub eps: Vec<usize>,
    pub seminorm: f64,
    pub passed: bool,
}

/// With `g = f − E(f | 𝒵*_ε)` on the star space, checks `|||g|||*_ε ≤ 1e-8`.
pub fn structure_check(magic: &MagicSystem, eps: &[usize], f: &Observable) -> Result<StructureReport> {
    let star = magic.star();
    star.check_observable(f)?;
    if !f.is_finite() {
        return Err(Error::Precondition(format!("observable `{}` is not bounded", f.name)));
    }
    let eps = index_set(star, eps)?;
    let z = z_partition(star, &eps)?;
    let g = f.sub(&star.cond_expect(f, &z));
    let seminorm = box_seminorm(star, &eps, &g)?;
    Ok(StructureReport { eps, seminorm, passed: seminorm <= STRUCTURE_TOLERANCE })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModel;
    use crate::system::tests::{perm, swap_system};

    #[test]
    fn identity_action_gives_diagonal() {
        let sys = FiniteSystem::uniform(3, GroupModel::cyclic(2), vec![vec![Perm::identity(3)]]).unwrap();
        let m = magic_extension(&sys).unwrap();
        assert_eq!(m.tuples(), &[vec![0, 0], vec![1, 1], vec![2, 2]]);
        assert!(m.star().generator_perms(0)[0].is_identity());
    }

    #[test]
    fn swap_moves_only_the_zero_coordinate() {
        let m = magic_extension(&swap_system(1)).unwrap();
        assert_eq!(m.star().len(), 4);
        let s = &m.star().generator_perms(0)[0];
        for a in 0..4 {
            let (t, u) = (&m.tuples()[a], &m.tuples()[s.apply(a)]);
            assert_eq!(u[1], t[1]);
            assert_ne!(u[0], t[0]);
        }
    }

    #[test]
    fn two_equal_swaps() {
        // the diagonal swap on X² has two orbits, so μ^(1,2) lives on 8 tuples
        let m = magic_extension(&swap_system(2)).unwrap();
        assert_eq!(m.star().len(), 8);
        assert!(m.invariance_defect() < 1e-15);
        assert!(m.pushforward_defect() < 1e-15);
        assert!(m.intertwining_failure().is_none());
    }

    #[test]
    fn z_partition_examples() {
        let sys = FiniteSystem::uniform(
            4,
            GroupModel::cyclic(4),
            vec![vec![perm(&[2, 3, 0, 1])], vec![perm(&[1, 0, 3, 2])]],
        )
        .unwrap();
        assert_eq!(z_partition(&sys, &[0]).unwrap(), sys.invariant_partition(&[0]).unwrap());
        assert_eq!(z_partition(&sys, &[0, 1]).unwrap(), Partition::singletons(4));
    }

    #[test]
    fn structure_of_measurable_and_constant_functions() {
        let m = magic_extension(&swap_system(2)).unwrap();
        let c = Observable::constant(m.star().len(), 0.3);
        assert!(structure_check(&m, &[0, 1], &c).unwrap().seminorm < 1e-12);
        let z = z_partition(m.star(), &[0]).unwrap();
        let labels: Vec<f64> = (0..m.star().len()).map(|a| z.block_of(a) as f64).collect();
        let f = Observable::new("z", labels);
        assert!(structure_check(&m, &[0], &f).unwrap().passed);
    }
}
