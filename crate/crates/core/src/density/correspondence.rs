//! The empirical symbolic system of a lattice subset.
//!
//! `E ∩ Ψ_N` is read as a configuration on the torus `(Z/N)^d`. A position
//! `q` stands for the shifted indicator `ξ_q(x) = 1_E(x + q)`, so the left shift
//! `T^(i)_1` sends `ξ_q` to `ξ_{q − e_i}`. Positions are grouped by their
//! radius-`r` pattern, refined until the grouping is respected by every unit
//! shift; the groups are the points, weighted by frequency. The shift action
//! is then an exact measure-preserving bijection and `A = {ξ : ξ(0) = 1}` has
//! weight exactly `|E ∩ Ψ_N| / N^d`. Patterns differ from those of `E` itself
//! only at positions within `r` of the box boundary.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::SubsetWindow;
use crate::error::{Error, Result};
use crate::group::{Element, GroupModel};
use crate::perm::Perm;
use crate::system::FiniteSystem;

#[derive(Clone, Debug)]
pub struct Correspondence {
    pub system: FiniteSystem,
    /// Points of `A`.
    pub set_a: Vec<usize>,
    pub weight_a: f64,
    /// `|E ∩ Ψ_N| / |Ψ_N|`.
    pub density: f64,
    /// Fraction of positions whose radius-`r` neighbourhood leaves `Ψ_N`.
    pub boundary_error: f64,
    /// Positions whose unit shift crosses the torus seam.
    pub wrapped_transitions: usize,
    pub radius: usize,
    pub n: usize,
    extents: Vec<usize>,
    class_of: Vec<usize>,
    window: SubsetWindow,
    psi_axes: Vec<Vec<Element>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntersectionCheck {
    pub shifts: Vec<Vec<i64>>,
    /// `μ(⋂_j T_{g_j} A)`.
    pub measure: f64,
    /// `|Ψ_N ∩ ⋂_j g_j⁻¹E| / |Ψ_N|`, read from the window.
    pub density: f64,
    /// Fraction of `q ∈ Ψ_N` with some `q + g_j` outside `Ψ_N`.
    pub shift_error: f64,
    pub passed: bool,
}

fn strides(extents: &[usize]) -> Vec<usize> {
    (0..extents.len()).map(|i| extents[i + 1..].iter().product()).collect()
}

fn neighbour(q: usize, extents: &[usize], strides: &[usize], delta: &[i64]) -> usize {
    let mut out = 0;
    for i in 0..extents.len() {
        let c = (q / strides[i] % extents[i]) as i64 + delta[i];
        out += c.rem_euclid(extents[i] as i64) as usize * strides[i];
    }
    out
}

/// Builds the empirical system of `E` at radius `r` over `Ψ_N`.
pub fn correspondence_system(e: &SubsetWindow, radius: usize, n: usize) -> Result<Correspondence> {
    if e.lattice_frame().is_none() {
        return Err(Error::Unsupported("the correspondence construction needs a lattice window in Z^d".into()));
    }
    if 2 * radius + 1 > n {
        return Err(Error::Window(format!("radius {radius} does not fit in Ψ_{n}")));
    }
    let d = e.dim();
    let psi_axes = e.ambient().folner_axes(n)?;
    let extents: Vec<usize> = psi_axes.iter().map(|a| a.len()).collect();
    let total: usize = extents.iter().product();
    let st = strides(&extents);

    let mut bits = vec![false; total];
    for q in 0..total {
        let point: Vec<Element> = (0..d).map(|i| psi_axes[i][q / st[i] % extents[i]].clone()).collect();
        bits[q] = e.contains(&point).ok_or_else(|| Error::Window(format!("Ψ_{n} leaves the window")))?;
    }

    let offsets: Vec<Vec<i64>> = {
        let side = 2 * radius + 1;
        (0..side.pow(d as u32))
            .map(|mut t| {
                let mut v = vec![0i64; d];
                for c in v.iter_mut().rev() {
                    *c = (t % side) as i64 - radius as i64;
                    t /= side;
                }
                v
            })
            .collect()
    };
    let patterns: Vec<Vec<bool>> = (0..total)
        .map(|q| offsets.iter().map(|v| bits[neighbour(q, &extents, &st, v)]).collect())
        .collect();
    let mut labels = relabel(&patterns);

    let units: Vec<(Vec<i64>, Vec<i64>)> = (0..d)
        .map(|i| {
            let mut plus = vec![0i64; d];
            plus[i] = 1;
            let minus = plus.iter().map(|x| -x).collect();
            (plus, minus)
        })
        .collect();
    let step: Vec<Vec<(usize, usize)>> = (0..total)
        .map(|q| units.iter().map(|(p, m)| (neighbour(q, &extents, &st, p), neighbour(q, &extents, &st, m))).collect())
        .collect();
    let mut classes = labels.iter().max().map_or(0, |m| m + 1);
    loop {
        let keys: Vec<Vec<usize>> = (0..total)
            .map(|q| {
                let mut k = vec![labels[q]];
                for &(p, m) in &step[q] {
                    k.push(labels[p]);
                    k.push(labels[m]);
                }
                k
            })
            .collect();
        let next = relabel(&keys);
        let count = next.iter().max().map_or(0, |m| m + 1);
        labels = next;
        if count == classes {
            break;
        }
        classes = count;
    }

    let mut rep = vec![usize::MAX; classes];
    let mut weights = vec![0.0; classes];
    for q in 0..total {
        if rep[labels[q]] == usize::MAX {
            rep[labels[q]] = q;
        }
        weights[labels[q]] += 1.0;
    }
    weights.iter_mut().for_each(|w| *w /= total as f64);

    let actions = (0..d)
        .map(|i| {
            let images = rep.iter().map(|&q| labels[step[q][i].1] as u32).collect();
            Perm::from_images(images)
                .map(|p| vec![p])
                .ok_or_else(|| Error::InvalidSystem(format!("shift {} is not a bijection of the classes", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut seen: HashMap<String, usize> = HashMap::new();
    let names = rep
        .iter()
        .map(|&q| {
            let base: String = patterns[q].iter().map(|&b| if b { '1' } else { '0' }).collect();
            let k = seen.entry(base.clone()).or_insert(0);
            *k += 1;
            if *k == 1 {
                base
            } else {
                format!("{base}#{k}")
            }
        })
        .collect();
    let system = FiniteSystem::new(names, weights.clone(), GroupModel::integers(), actions)?;

    let set_a: Vec<usize> = (0..classes).filter(|&c| bits[rep[c]]).collect();
    let weight_a = set_a.iter().map(|&c| weights[c]).sum();
    let members = bits.iter().filter(|&&b| b).count();
    let interior: usize = extents.iter().map(|&l| l - 2 * radius).product();
    let wrapped_transitions = (0..total).filter(|&q| (0..d).any(|i| (q / st[i]).is_multiple_of(extents[i]))).count();

    Ok(Correspondence {
        system,
        set_a,
        weight_a,
        density: members as f64 / total as f64,
        boundary_error: 1.0 - interior as f64 / total as f64,
        wrapped_transitions,
        radius,
        n,
        extents,
        class_of: labels,
        window: e.clone(),
        psi_axes,
    })
}

fn relabel<K: Eq + std::hash::Hash + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids: HashMap<&K, usize> = HashMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect()
}

impl Correspondence {
    /// Class (system point) of a torus position, row-major in `Ψ_N`.
    pub fn class_of(&self, position: usize) -> usize {
        self.class_of[position]
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Whether the shift action preserves the weights exactly.
    pub fn is_measure_preserving(&self) -> bool {
        let w = self.system.weights();
        (0..self.system.d()).all(|i| {
            let p = &self.system.generator_perms(i)[0];
            (0..w.len()).all(|x| w[p.apply(x)] == w[x])
        })
    }

    /// Compares `μ(⋂_j T_{g_j} A)` with the window density of `⋂_j g_j⁻¹E`.
    ///
    /// Under the left shift `T_g A = {ξ : ξ(g) = 1}`, which corresponds to the
    /// positions `q` with `q + g ∈ E`, i.e. to `g⁻¹E`.
    pub fn intersection_check(&self, shifts: &[Vec<i64>]) -> Result<IntersectionCheck> {
        let d = self.extents.len();
        if shifts.is_empty() || shifts.iter().any(|g| g.len() != d) {
            return Err(Error::Dimension(format!("shifts must be a nonempty list of points in Z^{d}")));
        }
        let in_a: Vec<bool> = {
            let mut v = vec![false; self.system.len()];
            self.set_a.iter().for_each(|&c| v[c] = true);
            v
        };
        let mut inside = vec![true; self.system.len()];
        for g in shifts {
            // ξ ∈ T_g A  ⇔  T_g⁻¹ ξ ∈ A
            let mut back = Perm::identity(self.system.len());
            for (i, &gi) in g.iter().enumerate() {
                back = self.system.element_perm(i, &Element(vec![-gi])).compose(&back);
            }
            for (x, keep) in inside.iter_mut().enumerate() {
                *keep &= in_a[back.apply(x)];
            }
        }
        let measure: f64 = inside.iter().zip(self.system.weights()).filter(|(k, _)| **k).map(|(_, w)| w).sum();

        let total: usize = self.extents.iter().product();
        let st = strides(&self.extents);
        let (mut hits, mut boundary) = (0usize, 0usize);
        for q in 0..total {
            let mut all = true;
            let mut edge = false;
            for g in shifts {
                let mut point = Vec::with_capacity(d);
                for i in 0..d {
                    let c = (q / st[i] % self.extents[i]) as i64 + g[i];
                    edge |= c < 0 || c >= self.extents[i] as i64;
                    let base = self.psi_axes[i][0].0[0];
                    point.push(Element(vec![base + c]));
                }
                all &= self.window.contains(&point).unwrap_or(false);
            }
            hits += all as usize;
            boundary += edge as usize;
        }
        let density = hits as f64 / total as f64;
        let shift_error = boundary as f64 / total as f64;
        Ok(IntersectionCheck {
            shifts: shifts.to_vec(),
            measure,
            density,
            shift_error,
            passed: density >= measure - shift_error - 1e-12,
        })
    }
}
