//! Subsets of `G^d` seen through a finite window: densities along Følner
//! sets, cube configurations `h.g`, and their counts.

mod bitgrid;
mod correspondence;
pub mod gaps;
mod syndetic;
pub mod window_file;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use correspondence::{correspondence_system, Correspondence, IntersectionCheck};
pub use syndetic::{syndeticity_probe, BoxProbe, SyndeticReport};

use crate::error::{Error, Result};
use crate::group::{cartesian, index_map, Element, GroupKind, GroupModel, ProductGroupModel};

/// How points outside the window are treated by cube counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Only configurations lying entirely inside the window count.
    #[default]
    Open,
    /// Coordinates wrap around the window box (lattice windows only).
    Toroidal,
}

/// `h.g` (left) or `g_*h` (right).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubePattern {
    pub h: Vec<Element>,
    pub orientation: Orientation,
}

impl CubePattern {
    pub fn left(h: Vec<Element>) -> CubePattern {
        CubePattern { h, orientation: Orientation::Left }
    }

    pub fn right(h: Vec<Element>) -> CubePattern {
        CubePattern { h, orientation: Orientation::Right }
    }
}

/// The `2^d` points of a cube configuration in vertex order, with repeats:
/// `(h_1^{−ε_1} g_1, …, h_d^{−ε_d} g_d)` for the left orientation and
/// `(g_1 h_1^{ε_1}, …, g_d h_d^{ε_d})` for the right.
pub fn cube_points(ambient: &ProductGroupModel, pattern: &CubePattern, g: &[Element]) -> Result<Vec<Vec<Element>>> {
    let d = ambient.dim();
    if pattern.h.len() != d || g.len() != d {
        return Err(Error::Dimension(format!(
            "pattern of length {} and base point of length {} in G^{d}",
            pattern.h.len(),
            g.len()
        )));
    }
    for (i, model) in ambient.factors().iter().enumerate() {
        model.check_element(&pattern.h[i])?;
        model.check_element(&g[i])?;
    }
    let moved: Vec<Element> = ambient
        .factors()
        .iter()
        .enumerate()
        .map(|(i, m)| match pattern.orientation {
            Orientation::Left => m.multiply(&m.inverse(&pattern.h[i]), &g[i]),
            Orientation::Right => m.multiply(&g[i], &pattern.h[i]),
        })
        .collect();
    Ok((0..1usize << d)
        .map(|eps| (0..d).map(|i| if eps >> i & 1 == 1 { moved[i].clone() } else { g[i].clone() }).collect())
        .collect())
}

/// A subset `E ⊆ G^d` recorded on a finite product window.
#[derive(Clone, Debug)]
pub struct SubsetWindow {
    ambient: ProductGroupModel,
    axes: Vec<Vec<Element>>,
    lookup: Vec<HashMap<Element, usize>>,
    mask: Vec<bool>,
    boundary: Boundary,
    target_density: Option<f64>,
    seed: Option<u64>,
}

impl SubsetWindow {
    /// `mask` is indexed like [`cartesian`] of `axes`: last axis fastest.
    pub fn new(ambient: ProductGroupModel, axes: Vec<Vec<Element>>, mask: Vec<bool>) -> Result<SubsetWindow> {
        if axes.len() != ambient.dim() {
            return Err(Error::Dimension(format!("{} window axes in G^{}", axes.len(), ambient.dim())));
        }
        if axes.iter().any(|a| a.is_empty()) {
            return Err(Error::Window("window axes must be nonempty".into()));
        }
        let lookup: Vec<HashMap<Element, usize>> = axes.iter().map(|a| index_map(a)).collect();
        for (i, (axis, map)) in axes.iter().zip(&lookup).enumerate() {
            if map.len() != axis.len() {
                return Err(Error::Window(format!("window axis {} repeats an element", i + 1)));
            }
            for g in axis {
                ambient.factors()[i].check_element(g)?;
            }
        }
        let size: usize = axes.iter().map(|a| a.len()).product();
        if mask.len() != size {
            return Err(Error::Window(format!("mask has {} entries, window has {size}", mask.len())));
        }
        Ok(SubsetWindow { ambient, axes, lookup, mask, boundary: Boundary::Open, target_density: None, seed: None })
    }

    /// The box `∏[origin_i, origin_i + extents_i)` in `Z^d`.
    pub fn lattice_box(origin: &[i64], extents: &[usize], mask: Vec<bool>) -> Result<SubsetWindow> {
        if origin.len() != extents.len() || origin.is_empty() {
            return Err(Error::Dimension("origin and extents must have the same positive length".into()));
        }
        let ambient = ProductGroupModel::power(GroupModel::integers(), extents.len())?;
        let axes = origin
            .iter()
            .zip(extents)
            .map(|(&o, &e)| (0..e as i64).map(|t| Element(vec![o + t])).collect())
            .collect();
        SubsetWindow::new(ambient, axes, mask)
    }

    /// A lattice box whose members satisfy `pred` (coordinates as integers).
    pub fn lattice_from_fn(origin: &[i64], extents: &[usize], pred: impl Fn(&[i64]) -> bool) -> Result<SubsetWindow> {
        let mut w = SubsetWindow::lattice_box(origin, extents, vec![false; extents.iter().product()])?;
        for p in 0..w.mask.len() {
            let c = w.coords_of(p);
            w.mask[p] = pred(&c);
        }
        Ok(w)
    }

    /// Independent membership with probability `p`, seeded.
    pub fn random_lattice(origin: &[i64], extents: &[usize], p: f64, seed: u64) -> Result<SubsetWindow> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Precondition(format!("membership probability {p} outside [0,1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = (0..extents.iter().product::<usize>()).map(|_| rng.gen_bool(p)).collect();
        let mut w = SubsetWindow::lattice_box(origin, extents, mask)?;
        w.target_density = Some(p);
        w.seed = Some(seed);
        Ok(w)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<SubsetWindow> {
        if boundary == Boundary::Toroidal && self.lattice_frame().is_none() {
            return Err(Error::Unsupported("toroidal mode needs a lattice box window".into()));
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn ambient(&self) -> &ProductGroupModel {
        &self.ambient
    }

    pub fn axes(&self) -> &[Vec<Element>] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn members(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn target_density(&self) -> Option<f64> {
        self.target_density
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `(origin, extents)` when the window is a box in `Z^d` with consecutive axes.
    pub fn lattice_frame(&self) -> Option<(Vec<i64>, Vec<usize>)> {
        let lattice = self
            .ambient
            .factors()
            .iter()
            .all(|m| matches!(m.kind(), GroupKind::Lattice { rank: 1 }));
        if !lattice {
            return None;
        }
        let mut origin = Vec::new();
        for axis in &self.axes {
            let o = axis[0].0[0];
            if axis.iter().enumerate().any(|(t, g)| g.0[0] != o + t as i64) {
                return None;
            }
            origin.push(o);
        }
        Some((origin, self.shape()))
    }

    fn coords_of(&self, mut p: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            let l = self.axes[i].len();
            out[i] = self.axes[i][p % l].0[0];
            p /= l;
        }
        out
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.len() + i)
    }

    /// Window position of a point, wrapping in toroidal mode.
    pub fn position(&self, point: &[Element]) -> Option<usize> {
        if point.len() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim());
        for (i, g) in point.iter().enumerate() {
            let j = match self.lookup[i].get(g) {
                Some(&j) => j,
                None if self.boundary == Boundary::Toroidal => {
                    let o = self.axes[i][0].0[0];
                    (g.0[0] - o).rem_euclid(self.axes[i].len() as i64) as usize
                }
                None => return None,
            };
            idx.push(j);
        }
        Some(self.offset(&idx))
    }

    /// Membership: `None` outside the window.
    pub fn contains(&self, point: &[Element]) -> Option<bool> {
        self.position(point).map(|p| self.mask[p])
    }

    pub fn point(&self, p: usize) -> Vec<Element> {
        let mut out = vec![Element(Vec::new()); self.dim()];
        let mut rest = p;
        for i in (0..self.dim()).rev() {
            let l = self.axes[i].len();
            out[i] = self.axes[i][rest % l].clone();
            rest /= l;
        }
        out
    }
}

/// `|E ∩ Φ_N| / |Φ_N|` for the ambient product family.
pub fn density(e: &SubsetWindow, n: usize) -> Result<f64> {
    let axes = e.ambient.folner_axes(n)?;
    let size: usize = axes.iter().map(|a| a.len()).product();
    let mut hits = 0usize;
    for point in cartesian(&axes) {
        let idx: Option<Vec<usize>> = point.iter().enumerate().map(|(i, g)| e.lookup[i].get(g).copied()).collect();
        let idx = idx.ok_or_else(|| Error::Window(format!("Φ_{n} leaves the window")))?;
        hits += e.mask[e.offset(&idx)] as usize;
    }
    Ok(hits as f64 / size as f64)
}

/// Densities along a schedule and their maximum, the finite stand-in for the limsup.
pub fn density_schedule(e: &SubsetWindow, schedule: &[usize]) -> Result<(Vec<f64>, f64)> {
    let values = schedule.iter().map(|&n| density(e, n)).collect::<Result<Vec<_>>>()?;
    let max = values.iter().copied().fold(0.0, f64::max);
    Ok((values, max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Brute,
    Fast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeCount {
    pub count: u64,
    /// Number of base points `g` in the counting region.
    pub region: u64,
    pub normalized: f64,
}

impl CubeCount {
    fn new(count: u64, region: u64) -> CubeCount {
        let normalized = if region == 0 { 0.0 } else { count as f64 / region as f64 };
        CubeCount { count, region, normalized }
    }
}

/// Counts base points `g` with the whole configuration inside `E`.
///
/// The counting region is every window point in toroidal mode and otherwise
/// the window points whose configuration stays inside the window.
pub fn cube_count(e: &SubsetWindow, pattern: &CubePattern, method: CountMethod) -> Result<CubeCount> {
    match method {
        CountMethod::Brute => brute_count(e, pattern),
        CountMethod::Fast => bitgrid::fast_count(e, pattern),
    }
}

fn brute_count(e: &SubsetWindow, pattern: &CubePattern) -> Result<CubeCount> {
    cube_points(&e.ambient, pattern, &e.point(0))?;
    if let Some((_, extents)) = e.lattice_frame() {
        return Ok(brute_lattice(e, pattern, &extents));
    }
    let (count, region) = (0..e.len())
        .into_par_iter()
        .map(|p| {
            let pts = cube_points(&e.ambient, pattern, &e.point(p)).expect("validated pattern");
            let mut inside = true;
            let mut all = true;
            for q in &pts {
                match e.contains(q) {
                    Some(m) => all &= m,
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if inside {
                ((all) as u64, 1u64)
            } else {
                (0, 0)
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(CubeCount::new(count, region))
}

/// Direct enumeration over window indices with integer arithmetic.
fn brute_lattice(e: &SubsetWindow, pattern: &CubePattern, extents: &[usize]) -> CubeCount {
    let d = extents.len();
    let step: Vec<i64> = pattern
        .h
        .iter()
        .map(|h| match pattern.orientation {
            Orientation::Left => -h.0[0],
            Orientation::Right => h.0[0],
        })
        .collect();
    let toroidal = e.boundary == Boundary::Toroidal;
    let (count, region) = (0..e.len())
        .into_par_iter()
        .map(|p| {
            let mut idx = vec![0i64; d];
            let mut rest = p;
            for i in (0..d).rev() {
                idx[i] = (rest % extents[i]) as i64;
                rest /= extents[i];
            }
            let mut all = true;
            for eps in 0..1usize << d {
                let mut off = 0usize;
                for i in 0..d {
                    let mut c = idx[i] + if eps >> i & 1 == 1 { step[i] } else { 0 };
                    let l = extents[i] as i64;
                    if toroidal {
                        c = c.rem_euclid(l);
                    } else if c < 0 || c >= l {
                        return (0u64, 0u64);
                    }
                    off = off * extents[i] + c as usize;
                }
                all &= e.mask[off];
            }
            (all as u64, 1)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    CubeCount::new(count, region)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodShiftReport {
    pub delta: f64,
    pub threshold: f64,
    pub shape: Vec<usize>,
    /// Normalized counts per shift, last axis fastest.
    pub values: Vec<f64>,
    pub mean_normalized: f64,
    pub members: Vec<Vec<Element>>,
    pub fraction: f64,
    pub largest_empty_box: usize,
    /// `(run length, occurrences)` of non-member runs along the last axis.
    pub gap_histogram: Vec<(usize, usize)>,
}

/// Shifts `h` in `shift_window` with normalized count `> density(E, N)^{2^d} − c`.
pub fn good_shift_set(
    e: &SubsetWindow,
    c: f64,
    shift_window: &[Vec<Element>],
    n: usize,
    orientation: Orientation,
) -> Result<GoodShiftReport> {
    let d = e.dim();
    if shift_window.len() != d || shift_window.iter().any(|a| a.is_empty()) {
        return Err(Error::Window("the shift window must have one nonempty axis per coordinate".into()));
    }
    let delta = density(e, n)?;
    let threshold = delta.powi(1 << d) - c;
    let method = if e.lattice_frame().is_some() { CountMethod::Fast } else { CountMethod::Brute };
    let shifts = cartesian(shift_window);
    let values = shifts
        .par_iter()
        .map(|h| cube_count(e, &CubePattern { h: h.clone(), orientation }, method).map(|c| c.normalized))
        .collect::<Result<Vec<f64>>>()?;
    let mask: Vec<bool> = values.iter().map(|&v| v > threshold).collect();
    let members: Vec<Vec<Element>> =
        shifts.into_iter().zip(&mask).filter(|(_, &m)| m).map(|(h, _)| h).collect();
    let shape: Vec<usize> = shift_window.iter().map(|a| a.len()).collect();
    Ok(GoodShiftReport {
        delta,
        threshold,
        mean_normalized: values.iter().sum::<f64>() / values.len() as f64,
        fraction: members.len() as f64 / values.len() as f64,
        members,
        largest_empty_box: gaps::largest_empty_cube(&mask, &shape),
        gap_histogram: gaps::gap_histogram(&mask, &shape),
        shape,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: i64) -> Element {
        Element(vec![v])
    }

    #[test]
    fn density_examples() {
        let full = SubsetWindow::lattice_from_fn(&[0, 0], &[10, 10], |_| true).unwrap();
        assert_eq!(density(&full, 7).unwrap(), 1.0);
        let empty = SubsetWindow::lattice_from_fn(&[0, 0], &[10, 10], |_| false).unwrap();
        assert_eq!(density(&empty, 7).unwrap(), 0.0);
        let even = SubsetWindow::lattice_from_fn(&[0, 0], &[100, 100], |c| c[0] % 2 == 0 && c[1] % 2 == 0).unwrap();
        for n in [2, 10, 50, 100] {
            assert_eq!(density(&even, n).unwrap(), 0.25);
        }
        assert!(matches!(density(&even, 101), Err(Error::Window(_))));
    }

    #[test]
    fn cube_points_examples() {
        let z2 = ProductGroupModel::power(GroupModel::integers(), 2).unwrap();
        let pts = cube_points(&z2, &CubePattern::left(vec![z(1), z(1)]), &[z(5), z(5)]).unwrap();
        assert_eq!(pts, vec![vec![z(5), z(5)], vec![z(4), z(5)], vec![z(5), z(4)], vec![z(4), z(4)]]);
        let same = cube_points(&z2, &CubePattern::left(vec![z(0), z(0)]), &[z(2), z(3)]).unwrap();
        assert!(same.iter().all(|p| p == &vec![z(2), z(3)]));
        let z5 = ProductGroupModel::power(GroupModel::cyclic(5), 1).unwrap();
        let pts = cube_points(&z5, &CubePattern::left(vec![z(2)]), &[z(1)]).unwrap();
        assert_eq!(pts, vec![vec![z(1)], vec![z(4)]]);
    }

    #[test]
    fn cube_count_examples() {
        let full = SubsetWindow::lattice_from_fn(&[0, 0], &[4, 4], |_| true).unwrap();
        let h = CubePattern::left(vec![z(1), z(1)]);
        for m in [CountMethod::Brute, CountMethod::Fast] {
            assert_eq!(cube_count(&full, &h, m).unwrap().count, 9);
        }
        let empty = SubsetWindow::lattice_from_fn(&[0, 0], &[4, 4], |_| false).unwrap();
        assert_eq!(cube_count(&empty, &h, CountMethod::Brute).unwrap().count, 0);
        let some = SubsetWindow::random_lattice(&[0, 0], &[9, 7], 0.4, 3).unwrap();
        let id = CubePattern::left(vec![z(0), z(0)]);
        assert_eq!(cube_count(&some, &id, CountMethod::Brute).unwrap().count, some.members() as u64);
    }

    #[test]
    fn fast_rejects_non_lattice() {
        let z5 = ProductGroupModel::power(GroupModel::cyclic(5), 1).unwrap();
        let axes = vec![(0..5).map(z).collect()];
        let w = SubsetWindow::new(z5, axes, vec![true; 5]).unwrap();
        assert!(matches!(
            cube_count(&w, &CubePattern::left(vec![z(1)]), CountMethod::Fast),
            Err(Error::Unsupported(_))
        ));
        assert_eq!(cube_count(&w, &CubePattern::left(vec![z(1)]), CountMethod::Brute).unwrap().count, 5);
    }

    #[test]
    fn good_shifts_trivial_cases() {
        let full = SubsetWindow::lattice_from_fn(&[0, 0], &[16, 16], |_| true).unwrap();
        let shifts: Vec<Vec<Element>> = vec![(0..4).map(z).collect(); 2];
        let r = good_shift_set(&full, 0.01, &shifts, 16, Orientation::Left).unwrap();
        assert_eq!(r.members.len(), 16);
        let some = SubsetWindow::random_lattice(&[0, 0], &[16, 16], 0.3, 9).unwrap();
        let r = good_shift_set(&some, 1.0, &shifts, 16, Orientation::Left).unwrap();
        assert_eq!(r.members.len(), 16);
        assert_eq!(r.largest_empty_box, 0);
    }
}
