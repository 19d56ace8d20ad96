//! Vertices of the discrete cube `{0,1}^k`.
//!
//! Vertices are enumerated in reverse-lexicographic order: `ε` sits at
//! position `Σ_j ε_j 2^j`, so the last coordinate is the most significant and
//! the all-zeros vertex comes first. Every joining, tuple and observable map
//! in this crate uses this one convention.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeIndex {
    k: u8,
    bits: u32,
}

impl CubeIndex {
    pub fn new(k: usize, position: usize) -> CubeIndex {
        assert!(k <= 16 && position < (1 << k), "vertex {position} outside {{0,1}}^{k}");
        CubeIndex { k: k as u8, bits: position as u32 }
    }

    pub fn zero(k: usize) -> CubeIndex {
        CubeIndex::new(k, 0)
    }

    pub fn from_coords(coords: &[u8]) -> CubeIndex {
        let bits = coords.iter().enumerate().fold(0u32, |acc, (j, &e)| {
            assert!(e <= 1, "cube coordinates are 0 or 1");
            acc | ((e as u32) << j)
        });
        CubeIndex { k: coords.len() as u8, bits }
    }

    /// All `2^k` vertices in order.
    pub fn all(k: usize) -> impl Iterator<Item = CubeIndex> {
        (0..1usize << k).map(move |p| CubeIndex::new(k, p))
    }

    pub fn dim(self) -> usize {
        self.k as usize
    }

    pub fn position(self) -> usize {
        self.bits as usize
    }

    /// `ε_j` for zero-based `j`.
    pub fn coord(self, j: usize) -> bool {
        self.bits >> j & 1 == 1
    }

    pub fn coords(self) -> Vec<u8> {
        (0..self.dim()).map(|j| self.coord(j) as u8).collect()
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Debug for CubeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.coords().iter().map(|c| char::from(b'0' + c)).collect();
        write!(f, "ε={s}")
    }
}
