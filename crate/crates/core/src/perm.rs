//! Permutations of a finite point set, stored as image arrays.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A bijection of `0..n`, `p[x]` is the image of `x`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n as u32).collect())
    }

    /// Returns `None` unless `images` is a bijection of `0..images.len()`.
    pub fn from_images(images: Vec<u32>) -> Option<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            let y = y as usize;
            if y >= n || seen[y] {
                return None;
            }
            seen[y] = true;
        }
        Some(Perm(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &y)| i == y as usize)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.len(), other.len());
        Perm(other.0.iter().map(|&y| self.0[y as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Perm(inv)
    }

    pub fn commutes_with(&self, other: &Perm) -> bool {
        (0..self.len()).all(|x| self.apply(other.apply(x)) == other.apply(self.apply(x)))
    }

    pub fn cycles(&self) -> Cycles {
        Cycles::new(self)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.0)
    }
}

/// Cycle decomposition, used to raise a permutation to large integer powers in O(n).
#[derive(Clone, Debug)]
pub struct Cycles {
    cycles: Vec<Vec<u32>>,
    // (cycle index, position within the cycle) for every point
    position: Vec<(u32, u32)>,
}

impl Cycles {
    fn new(p: &Perm) -> Cycles {
        let n = p.len();
        let mut position = vec![(u32::MAX, 0); n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if position[start].0 != u32::MAX {
                continue;
            }
            let c = cycles.len() as u32;
            let mut cycle = Vec::new();
            let mut x = start;
            loop {
                position[x] = (c, cycle.len() as u32);
                cycle.push(x as u32);
                x = p.apply(x);
                if x == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Cycles { cycles, position }
    }

    /// The permutation raised to `exp`, negative exponents allowed.
    pub fn power(&self, exp: i64) -> Perm {
        let mut out = vec![0u32; self.position.len()];
        for (x, &(c, pos)) in self.position.iter().enumerate() {
            let cycle = &self.cycles[c as usize];
            let len = cycle.len() as i64;
            let target = (pos as i64 + exp).rem_euclid(len);
            out[x] = cycle[target as usize];
        }
        Perm(out)
    }

    /// Least common multiple of the cycle lengths.
    pub fn order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles
            .iter()
            .map(|c| c.len() as u64)
            .fold(1, |acc, l| acc / gcd(acc, l) * l)
    }
}
