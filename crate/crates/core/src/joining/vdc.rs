use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{translation_defect, Element, GroupModel, Side};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VdcReport {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    /// Largest left defect of `Φ_N` over `g ∈ Ψ_m`.
    pub max_defect: f64,
    /// `‖avg_Φ x_g − avg_{h∈Ψ_m} avg_Φ x_{hg}‖`.
    pub lhs: f64,
    pub bound: f64,
    pub passed: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Smallest power of two `N ≤ max_n` such that every `g ∈ Ψ_m` has left
/// defect below `c` on `Φ_N`.
pub fn choose_folner_index(phi: &GroupModel, psi: &GroupModel, m: usize, c: f64, max_n: usize) -> Result<usize> {
    let probes = psi.folner_set(m)?;
    let mut n = 1;
    while n <= max_n {
        let set = phi.folner_set(n)?;
        if probes.iter().all(|g| translation_defect(phi, &set, g, Side::Left) < c) {
            return Ok(n);
        }
        n *= 2;
    }
    Err(Error::Precondition(format!("no Følner index up to {max_n} has defects below {c}")))
}

/// Checks `‖avg_{Φ_N} x_g − avg_{h∈Ψ_m} avg_{g∈Φ_N} x_{hg}‖ < 2c` for unit-ball
/// vectors `x_g` supplied by `vectors`, which returns `None` outside its window.
pub fn vdc_check(
    vectors: &dyn Fn(&Element) -> Option<Vec<f64>>,
    phi: &GroupModel,
    n: usize,
    psi: &GroupModel,
    m: usize,
    c: f64,
) -> Result<VdcReport> {
    if !phi.same_group(psi) {
        return Err(Error::Precondition("Φ and Ψ are families of different groups".into()));
    }
    let big = phi.folner_set(n)?;
    let small = psi.folner_set(m)?;
    let max_defect = small
        .iter()
        .map(|h| translation_defect(phi, &big, h, Side::Left))
        .fold(0.0, f64::max);
    if max_defect >= c {
        return Err(Error::Precondition(format!(
            "Følner defect {max_defect} of Φ_{n} is not below c = {c}"
        )));
    }
    let fetch = |g: &Element| -> Result<Vec<f64>> {
        let v = vectors(g).ok_or_else(|| Error::Window(format!("no vector supplied for {g}")))?;
        if norm(&v) > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!("x_{g} has norm {} > 1", norm(&v))));
        }
        Ok(v)
    };
    let mut dim = None;
    let mut add = |acc: &mut Vec<f64>, v: Vec<f64>| -> Result<()> {
        match dim {
            None => {
                dim = Some(v.len());
                *acc = v;
            }
            Some(d) if d != v.len() => {
                return Err(Error::Dimension(format!("vectors of lengths {d} and {}", v.len())))
            }
            Some(_) => acc.iter_mut().zip(v).for_each(|(a, x)| *a += x),
        }
        Ok(())
    };
    let mut plain = Vec::new();
    for g in &big {
        add(&mut plain, fetch(g)?)?;
    }
    let mut shifted = Vec::new();
    for h in &small {
        for g in &big {
            add(&mut shifted, fetch(&phi.multiply(h, g))?)?;
        }
    }
    let a = big.len() as f64;
    let b = (big.len() * small.len()) as f64;
    let diff: Vec<f64> = plain.iter().zip(&shifted).map(|(p, s)| p / a - s / b).collect();
    let lhs = norm(&diff);
    Ok(VdcReport { n, m, c, max_defect, lhs, bound: 2.0 * c, passed: lhs < 2.0 * c })
}
