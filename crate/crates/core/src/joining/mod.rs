//! Cube joinings `μ^P` on `X^{2^k}` and the box seminorms built from them.
//!
//! `μ^∅ = μ`; for `P = (i_1, …, i_k)` with prefix `Q`, `μ^P` is the relatively
//! independent product of `μ^Q` with itself over the invariant partition of
//! the diagonal action `(T^(i_k))^{⊗2^{k-1}}` on the support of `μ^Q`. A tuple
//! `(x, y)` of the product stores `x` in the `ε_k = 0` half and `y` in the
//! `ε_k = 1` half, which is the reverse-lexicographic vertex order of
//! [`CubeIndex`](crate::cube::CubeIndex).
//!
//! Measures are sparse: tuples are bit-packed into `u128` keys and only
//! tuples of positive weight are stored, sorted by key.

mod checks;
mod vdc;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use checks::{
    csg_check, order_independence_check, seminorm_bound_check, BoundStatus, CsgReport,
    OrderReport, SeminormBoundReport,
};
pub use vdc::{choose_folner_index, vdc_check, VdcReport};

use crate::error::{Error, Result};
use crate::system::{FiniteSystem, Observable, Partition, UnionFind};

/// Default largest cube dimension `k`.
pub const DEFAULT_MAX_CUBE_DIM: usize = 3;

/// Slack allowed below zero for the integrand `∫ ⊗ f dμ^η` before it is
/// treated as evidence of a broken joining.
pub const NEGATIVE_INTEGRAND_TOLERANCE: f64 = 1e-10;

/// A self-joining of a finite system on `X^{2^k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Joining {
    order: Vec<usize>,
    points: usize,
    bits: u32,
    support: Vec<(u128, f64)>,
}

fn bits_for(points: usize) -> u32 {
    (usize::BITS - points.saturating_sub(1).leading_zeros()).max(1)
}

/// Builds `μ^P` with the default bound on `k`.
pub fn build_joining(system: &FiniteSystem, order: &[usize]) -> Result<Joining> {
    build_joining_bounded(system, order, DEFAULT_MAX_CUBE_DIM)
}

pub fn build_joining_bounded(system: &FiniteSystem, order: &[usize], max_k: usize) -> Result<Joining> {
    let k = order.len();
    if k > max_k {
        return Err(Error::CubeTooLarge { k, max: max_k });
    }
    for (a, &i) in order.iter().enumerate() {
        system.check_action(i)?;
        if order[..a].contains(&i) {
            return Err(Error::IndexSequence(format!("action {i} repeated in {order:?}")));
        }
    }
    let n = system.len();
    let bits = bits_for(n);
    if (bits as usize) << k > 128 {
        return Err(Error::Unsupported(format!(
            "tuples of {} points over {n} states do not fit the 128-bit key",
            1usize << k
        )));
    }
    let mut joining = Joining {
        order: Vec::new(),
        points: n,
        bits,
        support: system
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(x, &w)| (x as u128, w))
            .collect(),
    };
    for &i in order {
        joining = joining.extend(system, i)?;
    }
    Ok(joining)
}

impl Joining {
    /// The relatively independent product of `self` with itself over the
    /// invariant partition of the diagonal action of `T^(action)`.
    fn extend(&self, system: &FiniteSystem, action: usize) -> Result<Joining> {
        let blocks = self.invariant_blocks(system, action)?;
        let shift = self.bits * self.width() as u32;
        let mut support = Vec::new();
        for block in &blocks {
            let mass: f64 = block.iter().map(|&e| self.support[e].1).sum();
            for &a in block {
                let (x, wx) = self.support[a];
                for &b in block {
                    let (y, wy) = self.support[b];
                    support.push((x | (y << shift), wx * wy / mass));
                }
            }
        }
        support.sort_unstable_by_key(|&(key, _)| key);
        let mut order = self.order.clone();
        order.push(action);
        Ok(Joining { order, points: self.points, bits: self.bits, support })
    }

    /// Blocks (as support positions) of the partition of the support into
    /// orbits of the diagonal action of `T^(action)`.
    fn invariant_blocks(&self, system: &FiniteSystem, action: usize) -> Result<Vec<Vec<usize>>> {
        let index = self.index();
        let mut uf = UnionFind::new(self.support.len());
        for p in system.generator_perms(action) {
            for (a, &(key, _)) in self.support.iter().enumerate() {
                let image = self.map_key(key, |x| p.apply(x));
                let b = *index.get(&image).ok_or_else(|| {
                    Error::BrokenJoining(format!(
                        "support of μ^{:?} is not invariant under action {action}",
                        self.order
                    ))
                })?;
                uf.union(a, b);
            }
        }
        Ok(Partition::from_labels(&uf.labels()).blocks().to_vec())
    }

    fn index(&self) -> HashMap<u128, usize> {
        self.support.iter().enumerate().map(|(a, &(key, _))| (key, a)).collect()
    }

    #[inline]
    fn coord(&self, key: u128, position: usize) -> usize {
        let mask = (1u128 << self.bits) - 1;
        ((key >> (self.bits as usize * position)) & mask) as usize
    }

    fn map_key(&self, key: u128, f: impl Fn(usize) -> usize) -> u128 {
        (0..self.width()).fold(0u128, |acc, p| {
            acc | ((f(self.coord(key, p)) as u128) << (self.bits as usize * p))
        })
    }

    fn encode(&self, tuple: &[usize]) -> u128 {
        tuple
            .iter()
            .enumerate()
            .fold(0u128, |acc, (p, &x)| acc | ((x as u128) << (self.bits as usize * p)))
    }

    /// Cube dimension `k`.
    pub fn k(&self) -> usize {
        self.order.len()
    }

    /// Number of coordinates, `2^k`.
    pub fn width(&self) -> usize {
        1 << self.k()
    }

    /// The index sequence `P` this joining was built from.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|(_, w)| w).sum()
    }

    /// Support tuples with their weights, sorted.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.support.iter().map(move |&(key, w)| (self.decode(key), w))
    }

    pub fn decode(&self, key: u128) -> Vec<usize> {
        (0..self.width()).map(|p| self.coord(key, p)).collect()
    }

    /// Weight of a tuple, 0 off the support.
    pub fn weight(&self, tuple: &[usize]) -> f64 {
        let key = self.encode(tuple);
        match self.support.binary_search_by_key(&key, |&(k, _)| k) {
            Ok(a) => self.support[a].1,
            Err(_) => 0.0,
        }
    }

    /// `∫ ⊗_ε f_ε dμ^P`, with `fs` indexed by vertex position.
    pub fn integral(&self, fs: &[Observable]) -> Result<f64> {
        if fs.len() != self.width() {
            return Err(Error::Dimension(format!(
                "{} observables for {} cube vertices",
                fs.len(),
                self.width()
            )));
        }
        if let Some(f) = fs.iter().find(|f| f.len() != self.points) {
            return Err(Error::Dimension(format!(
                "observable `{}` has {} values, joining is over {} points",
                f.name,
                f.len(),
                self.points
            )));
        }
        Ok(self
            .support
            .iter()
            .map(|&(key, w)| {
                (0..self.width()).fold(w, |acc, p| acc * fs[p].values[self.coord(key, p)])
            })
            .sum())
    }

    /// `|||f|||` for this joining: the `2^k`-th root of `∫ ⊗ f dμ^P`.
    pub fn seminorm(&self, f: &Observable) -> Result<f64> {
        if self.k() == 0 {
            return Err(Error::IndexSequence("seminorms need a nonempty index set".into()));
        }
        let fs = vec![f.clone(); self.width()];
        let value = self.integral(&fs)?;
        if value < -NEGATIVE_INTEGRAND_TOLERANCE {
            return Err(Error::BrokenJoining(format!(
                "∫ ⊗ {} dμ^{:?} = {value} is negative",
                f.name, self.order
            )));
        }
        Ok(value.max(0.0).powf(1.0 / self.width() as f64))
    }

    /// Largest deviation of a coordinate marginal from `μ`.
    pub fn marginal_defect(&self, system: &FiniteSystem) -> f64 {
        let mut worst: f64 = 0.0;
        for p in 0..self.width() {
            let mut marginal = vec![0.0; self.points];
            for &(key, w) in &self.support {
                marginal[self.coord(key, p)] += w;
            }
            for (m, w) in marginal.iter().zip(system.weights()) {
                worst = worst.max((m - w).abs());
            }
        }
        worst
    }

    /// Largest weight change under the diagonal action of any generator of any
    /// action of `system`; a support tuple mapped off the support counts as
    /// losing all its weight.
    pub fn invariance_defect(&self, system: &FiniteSystem) -> f64 {
        let index = self.index();
        let mut worst: f64 = 0.0;
        for i in 0..system.d() {
            for p in system.generator_perms(i) {
                for &(key, w) in &self.support {
                    let image = self.map_key(key, |x| p.apply(x));
                    let wi = index.get(&image).map_or(0.0, |&b| self.support[b].1);
                    worst = worst.max((w - wi).abs());
                }
            }
        }
        worst
    }

    /// The same measure with coordinates relabelled to the vertex convention
    /// of `target`, which must be a reordering of [`Joining::order`].
    pub fn realign(&self, target: &[usize]) -> Result<Joining> {
        let k = self.k();
        let mut sorted_a = self.order.clone();
        let mut sorted_b = target.to_vec();
        sorted_a.sort_unstable();
        sorted_b.sort_unstable();
        if sorted_a != sorted_b {
            return Err(Error::IndexSequence(format!(
                "{target:?} is not a reordering of {:?}",
                self.order
            )));
        }
        // axis j of target is axis axis_map[j] of self
        let axis_map: Vec<usize> = target
            .iter()
            .map(|i| self.order.iter().position(|x| x == i).unwrap())
            .collect();
        let source_of: Vec<usize> = (0..1usize << k)
            .map(|eps| {
                (0..k).fold(0usize, |acc, j| acc | (((eps >> j) & 1) << axis_map[j]))
            })
            .collect();
        let mut support: Vec<(u128, f64)> = self
            .support
            .iter()
            .map(|&(key, w)| {
                let tuple: Vec<usize> = source_of.iter().map(|&s| self.coord(key, s)).collect();
                (self.encode(&tuple), w)
            })
            .collect();
        support.sort_unstable_by_key(|&(key, _)| key);
        Ok(Joining { order: target.to_vec(), points: self.points, bits: self.bits, support })
    }

    /// Total-variation distance `½ Σ |λ − λ'|` between joinings of equal shape.
    pub fn tv_distance(&self, other: &Joining) -> Result<f64> {
        if self.width() != other.width() || self.points != other.points {
            return Err(Error::Dimension("joinings live on different product spaces".into()));
        }
        let (a, b) = (&self.support, &other.support);
        let (mut i, mut j) = (0, 0);
        let mut total = 0.0;
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                total += a[i].1;
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                total += b[j].1;
                j += 1;
            } else {
                total += (a[i].1 - b[j].1).abs();
                i += 1;
                j += 1;
            }
        }
        Ok(0.5 * total)
    }

    pub fn to_export(&self) -> JoiningExport {
        JoiningExport {
            order: self.order.clone(),
            points: self.points,
            support: self.entries().collect(),
        }
    }
}

/// Serializable joining: support tuples and weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JoiningExport {
    pub order: Vec<usize>,
    pub points: usize,
    pub support: Vec<(Vec<usize>, f64)>,
}

/// `∫ ⊗_ε f_ε dμ^P`.
pub fn joining_integral(joining: &Joining, fs: &[Observable]) -> Result<f64> {
    joining.integral(fs)
}

/// Normalizes an index set: sorted, deduplicated, nonempty, in range.
pub(crate) fn index_set(system: &FiniteSystem, eta: &[usize]) -> Result<Vec<usize>> {
    let mut set = eta.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.is_empty() {
        return Err(Error::IndexSequence("the index set must be nonempty".into()));
    }
    for &i in &set {
        system.check_action(i)?;
    }
    Ok(set)
}

/// `|||f|||_η`.
pub fn box_seminorm(system: &FiniteSystem, eta: &[usize], f: &Observable) -> Result<f64> {
    system.check_observable(f)?;
    let set = index_set(system, eta)?;
    build_joining(system, &set)?.seminorm(f)
}
