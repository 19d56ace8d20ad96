//! Cube counts on lattice windows by separable bitset passes.
//!
//! With `M_0 = 1_E` and `s_i` the step of axis `i`, `M_i(g) = M_{i−1}(g) ∧
//! M_{i−1}(g + s_i e_i)`; after `d` passes `M_d(g) = 1` exactly when every
//! vertex of the configuration lies in `E`. Rows along the last axis are
//! packed into `u64` words.

use super::{Boundary, CubeCount, CubePattern, Orientation, SubsetWindow};
use crate::error::{Error, Result};

struct BitGrid {
    extents: Vec<usize>,
    words: usize,
    rows: usize,
    bits: Vec<u64>,
}

impl BitGrid {
    fn from_mask(mask: &[bool], extents: &[usize]) -> BitGrid {
        let last = *extents.last().unwrap();
        let words = last.div_ceil(64);
        let rows = mask.len() / last;
        let mut bits = vec![0u64; rows * words];
        for (p, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let (r, j) = (p / last, p % last);
            bits[r * words + j / 64] |= 1 << (j % 64);
        }
        BitGrid { extents: extents.to_vec(), words, rows, bits }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `self(g) ∧ self(g + s e_axis)`.
    fn and_shifted(&self, axis: usize, s: i64, wrap: bool) -> BitGrid {
        let d = self.extents.len();
        let mut out = self.bits.clone();
        if axis + 1 == d {
            let len = self.extents[axis];
            for r in 0..self.rows {
                let shifted = shift_row(self.row(r), s, len, wrap);
                for (o, w) in out[r * self.words..(r + 1) * self.words].iter_mut().zip(shifted) {
                    *o &= w;
                }
            }
        } else {
            let stride: usize = self.extents[axis + 1..d - 1].iter().product();
            let len = self.extents[axis] as i64;
            for r in 0..self.rows {
                let c = (r / stride) as i64 % len;
                let mut t = c + s;
                if wrap {
                    t = t.rem_euclid(len);
                }
                let dst = &mut out[r * self.words..(r + 1) * self.words];
                if !(0..len).contains(&t) {
                    dst.fill(0);
                    continue;
                }
                let src_row = (r as i64 + (t - c) * stride as i64) as usize;
                for (o, w) in dst.iter_mut().zip(self.row(src_row)) {
                    *o &= w;
                }
            }
        }
        BitGrid { extents: self.extents.clone(), words: self.words, rows: self.rows, bits: out }
    }
}

/// `out[j] = row[j + s]` for `j < len`, zero or wrapped outside.
fn shift_row(row: &[u64], s: i64, len: usize, wrap: bool) -> Vec<u64> {
    if wrap {
        let s = s.rem_euclid(len as i64) as usize;
        let a = shift_down(row, s, len);
        let b = shift_up(row, len - s, len);
        return a.iter().zip(b).map(|(x, y)| x | y).collect();
    }
    if s >= 0 {
        shift_down(row, s as usize, len)
    } else {
        shift_up(row, (-s) as usize, len)
    }
}

/// `out[j] = row[j + s]`.
fn shift_down(row: &[u64], s: usize, len: usize) -> Vec<u64> {
    let n = row.len();
    let mut out = vec![0u64; n];
    let (ws, bs) = (s / 64, s % 64);
    for (i, o) in out.iter_mut().enumerate() {
        let lo = row.get(i + ws).copied().unwrap_or(0);
        let hi = row.get(i + ws + 1).copied().unwrap_or(0);
        *o = if bs == 0 { lo } else { (lo >> bs) | (hi << (64 - bs)) };
    }
    mask_tail(&mut out, len);
    out
}

/// `out[j] = row[j − s]`.
fn shift_up(row: &[u64], s: usize, len: usize) -> Vec<u64> {
    let n = row.len();
    let mut out = vec![0u64; n];
    let (ws, bs) = (s / 64, s % 64);
    for (i, o) in out.iter_mut().enumerate() {
        if i < ws {
            continue;
        }
        let lo = row[i - ws];
        let below = if i > ws { row[i - ws - 1] } else { 0 };
        *o = if bs == 0 { lo } else { (lo << bs) | (below >> (64 - bs)) };
    }
    mask_tail(&mut out, len);
    out
}

fn mask_tail(words: &mut [u64], len: usize) {
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

pub(super) fn fast_count(e: &SubsetWindow, pattern: &CubePattern) -> Result<CubeCount> {
    let (_, extents) = e
        .lattice_frame()
        .ok_or_else(|| Error::Unsupported("the fast cube count needs a lattice box window in Z^d".into()))?;
    if pattern.h.len() != extents.len() {
        return Err(Error::Dimension(format!("pattern of length {} in Z^{}", pattern.h.len(), extents.len())));
    }
    let mut steps = Vec::with_capacity(extents.len());
    for (i, h) in pattern.h.iter().enumerate() {
        e.ambient().factors()[i].check_element(h)?;
        steps.push(match pattern.orientation {
            Orientation::Left => -h.0[0],
            Orientation::Right => h.0[0],
        });
    }
    let wrap = e.boundary() == Boundary::Toroidal;
    let mut grid = BitGrid::from_mask(e.mask(), &extents);
    for (axis, &s) in steps.iter().enumerate() {
        if s != 0 {
            grid = grid.and_shifted(axis, s, wrap);
        }
    }
    let region: u64 = if wrap {
        e.len() as u64
    } else {
        extents
            .iter()
            .zip(&steps)
            .map(|(&l, &s)| (l as i64 - s.abs()).max(0) as u64)
            .product()
    };
    Ok(CubeCount::new(grid.count(), region))
}
