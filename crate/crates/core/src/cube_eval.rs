//! Pointwise evaluation of `avg_g ∏_ε f_ε ∘ R_g^ε` where each axis ranges over
//! a histogram of distinct permutations.

use rayon::prelude::*;

use crate::perm::Perm;
use crate::system::Observable;

pub(crate) type Histogram = Vec<(Perm, u64)>;

/// `Σ_combos c · ∏_ε f_ε(R^ε x) / Σ c` for every point `x`, where `R^ε` composes
/// the chosen permutation of each axis `j` with `ε_j = 1`.
///
/// Work is split over the first axis and partial sums are added in a fixed
/// order, so the result does not depend on the thread count.
pub(crate) fn cube_pointwise(n: usize, hists: &[Histogram], fs: &[Observable]) -> Vec<f64> {
    let k = hists.len();
    debug_assert_eq!(fs.len(), 1 << k);
    if k == 0 {
        return fs[0].values.clone();
    }
    let total: f64 = hists.iter().map(|h| h.iter().map(|(_, c)| *c as f64).sum::<f64>()).product();
    let partials: Vec<Vec<f64>> = hists[0]
        .par_iter()
        .map(|first| {
            let mut acc = vec![0.0; n];
            let mut choice = vec![first];
            accumulate(n, hists, fs, &mut choice, &mut acc);
            acc
        })
        .collect();
    let mut out = vec![0.0; n];
    for part in partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out.iter_mut().for_each(|v| *v /= total);
    out
}

fn accumulate<'a>(
    n: usize,
    hists: &'a [Histogram],
    fs: &[Observable],
    choice: &mut Vec<&'a (Perm, u64)>,
    acc: &mut [f64],
) {
    let k = hists.len();
    if choice.len() < k {
        for entry in &hists[choice.len()] {
            choice.push(entry);
            accumulate(n, hists, fs, choice, acc);
            choice.pop();
        }
        return;
    }
    let weight: f64 = choice.iter().map(|(_, c)| *c as f64).product();
    // points[ε][x] = R^ε x, built from ε with its highest set bit cleared
    let mut points: Vec<Vec<usize>> = Vec::with_capacity(1 << k);
    points.push((0..n).collect());
    for eps in 1..1usize << k {
        let j = usize::BITS as usize - 1 - eps.leading_zeros() as usize;
        let base = &points[eps ^ (1 << j)];
        let p = &choice[j].0;
        points.push(base.iter().map(|&x| p.apply(x)).collect());
    }
    for x in 0..n {
        let mut prod = weight;
        for (eps, f) in fs.iter().enumerate() {
            prod *= f.values[points[eps][x]];
            if prod == 0.0 {
                break;
            }
        }
        acc[x] += prod;
    }
}
