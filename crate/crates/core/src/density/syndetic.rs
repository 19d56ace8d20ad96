use serde::{Deserialize, Serialize};

use super::SubsetWindow;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxProbe {
    /// Box side per axis, in window index units.
    pub sides: Vec<usize>,
    pub placements: usize,
    /// Placements containing at least one member.
    pub met: usize,
    pub all_met: bool,
}

/// Placement counts for each probe box. This only probes syndeticity on one
/// window; it does not decide it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SyndeticReport {
    pub shape: Vec<usize>,
    pub probes: Vec<BoxProbe>,
    /// Smallest-volume probe box met by every placement.
    pub minimal_box: Option<Vec<usize>>,
}

/// Slides every probe box over every placement inside the window and records
/// which placements meet the set.
pub fn syndeticity_probe(set: &SubsetWindow, probe_boxes: &[Vec<usize>]) -> Result<SyndeticReport> {
    let shape = set.shape();
    let d = shape.len();
    let prefix = PrefixSums::new(set.mask(), &shape);
    let mut probes = Vec::with_capacity(probe_boxes.len());
    for sides in probe_boxes {
        if sides.len() != d || sides.iter().zip(&shape).any(|(&s, &l)| s == 0 || s > l) {
            return Err(Error::Window(format!("probe box {sides:?} does not fit the window {shape:?}")));
        }
        let ranges: Vec<usize> = sides.iter().zip(&shape).map(|(&s, &l)| l - s + 1).collect();
        let placements: usize = ranges.iter().product();
        let mut met = 0;
        let mut lo = vec![0usize; d];
        for _ in 0..placements {
            if prefix.box_sum(&lo, sides) > 0 {
                met += 1;
            }
            for i in (0..d).rev() {
                lo[i] += 1;
                if lo[i] < ranges[i] {
                    break;
                }
                lo[i] = 0;
            }
        }
        probes.push(BoxProbe { sides: sides.clone(), placements, met, all_met: met == placements });
    }
    let minimal_box = probes
        .iter()
        .filter(|p| p.all_met)
        .min_by_key(|p| p.sides.iter().product::<usize>())
        .map(|p| p.sides.clone());
    Ok(SyndeticReport { shape, probes, minimal_box })
}

/// `d`-dimensional inclusive prefix sums over a grid padded by one.
struct PrefixSums {
    dims: Vec<usize>,
    sums: Vec<u64>,
}

impl PrefixSums {
    fn new(mask: &[bool], shape: &[usize]) -> PrefixSums {
        let dims: Vec<usize> = shape.iter().map(|l| l + 1).collect();
        let total: usize = dims.iter().product();
        let mut sums = vec![0u64; total];
        let strides = strides_of(&dims);
        let src_strides = strides_of(shape);
        for (p, &m) in mask.iter().enumerate() {
            let mut q = 0;
            for i in 0..shape.len() {
                q += (p / src_strides[i] % shape[i] + 1) * strides[i];
            }
            sums[q] = m as u64;
        }
        for (i, &stride) in strides.iter().enumerate() {
            for q in 0..total {
                if q / stride % dims[i] > 0 {
                    sums[q] += sums[q - stride];
                }
            }
        }
        PrefixSums { dims, sums }
    }

    fn box_sum(&self, lo: &[usize], sides: &[usize]) -> u64 {
        let d = lo.len();
        let strides = strides_of(&self.dims);
        let mut total: i64 = 0;
        for corner in 0..1usize << d {
            let mut q = 0;
            for i in 0..d {
                let c = if corner >> i & 1 == 1 { lo[i] } else { lo[i] + sides[i] };
                q += c * strides[i];
            }
            let sign = if corner.count_ones() % 2 == 0 { 1 } else { -1 };
            total += sign * self.sums[q] as i64;
        }
        total as u64
    }
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    (0..shape.len()).map(|i| shape[i + 1..].iter().product()).collect()
}
