//! Cubic ergodic averages
//! `A_N = (1/|F_N|) Σ_{g∈F_N} ∏_ε f_ε ∘ R_g^ε`, `R_g^ε = ∏_i (T^(i)_{g_i})^{ε_i}`,
//! with `F_N = Φ^(1)_N × … × Φ^(d)_N`, and the checks built on them.
//!
//! The sum over `F_N` factors through the distinct permutations each axis
//! realizes on `X`, so only the per-axis Følner sets need to be enumerable.

use serde::{Deserialize, Serialize};

use crate::cube_eval::{cube_pointwise, Histogram};
use crate::density::gaps::largest_empty_cube;
use crate::error::{Error, Result};
use crate::group::{Element, GroupModel, Sidedness};
use crate::joining::build_joining;
use crate::system::{FiniteSystem, Observable};

/// Cauchy threshold on `‖A_N − A_{N'}‖₂` for declaring convergence.
pub const CAUCHY_THRESHOLD: f64 = 1e-6;

/// Tolerance for exact identities on finite groups.
pub const EXACT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct CubeAverageRequest<'a> {
    pub system: &'a FiniteSystem,
    /// One observable per vertex of `{0,1}^d`, in [`CubeIndex`](crate::cube::CubeIndex) order.
    pub fs: Vec<Observable>,
    /// One Følner family per action `1..d`.
    pub families: Vec<GroupModel>,
    /// Strictly increasing Følner indices.
    pub schedule: Vec<usize>,
}

impl<'a> CubeAverageRequest<'a> {
    /// Request along the system's own family for the first `d` actions.
    pub fn new(system: &'a FiniteSystem, fs: Vec<Observable>, schedule: Vec<usize>) -> CubeAverageRequest<'a> {
        let d = fs.len().max(1).trailing_zeros() as usize;
        CubeAverageRequest { system, fs, families: vec![system.group().clone(); d], schedule }
    }

    /// The same observable at every vertex.
    pub fn uniform(system: &'a FiniteSystem, f: &Observable, d: usize, schedule: Vec<usize>) -> CubeAverageRequest<'a> {
        CubeAverageRequest::new(system, vec![f.clone(); 1 << d], schedule)
    }

    pub fn d(&self) -> usize {
        self.families.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.d();
        if self.fs.len() != 1 << d || !self.fs.len().is_power_of_two() {
            return Err(Error::Dimension(format!("{} observables for {d} actions", self.fs.len())));
        }
        if d > self.system.d() {
            return Err(Error::ActionIndex { index: d - 1, d: self.system.d() });
        }
        for f in &self.fs {
            self.system.check_observable(f)?;
            if !f.is_finite() {
                return Err(Error::Precondition(format!("observable `{}` is not bounded", f.name)));
            }
        }
        for fam in &self.families {
            self.system.check_family(fam)?;
        }
        if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("the Følner schedule must be strictly increasing".into()));
        }
        Ok(())
    }

    fn warnings(&self) -> Vec<String> {
        self.families
            .iter()
            .enumerate()
            .filter(|(_, f)| f.sidedness() != Sidedness::TwoSided)
            .map(|(i, f)| format!("family of action {} is {:?}, not two-sided", i + 1, f.sidedness()))
            .collect()
    }

    fn histograms(&self, families: &[GroupModel], n: &[usize]) -> Result<Vec<Histogram>> {
        families
            .iter()
            .zip(n)
            .enumerate()
            .map(|(i, (fam, &n))| Ok(self.system.perm_histogram(i, &fam.folner_set(n)?)))
            .collect()
    }
}

/// `A_N` with every axis at index `n`.
pub fn cube_average(req: &CubeAverageRequest, n: usize) -> Result<Observable> {
    cube_average_at(req, &vec![n; req.d()])
}

/// `A_N` with independent indices per axis.
pub fn cube_average_at(req: &CubeAverageRequest, n: &[usize]) -> Result<Observable> {
    req.validate()?;
    if n.len() != req.d() {
        return Err(Error::Dimension(format!("{} indices for {} axes", n.len(), req.d())));
    }
    cube_average_with(req, &req.families, n)
}

fn cube_average_with(req: &CubeAverageRequest, families: &[GroupModel], n: &[usize]) -> Result<Observable> {
    let hists = req.histograms(families, n)?;
    Ok(Observable::new(format!("A_{n:?}"), cube_pointwise(req.system.len(), &hists, &req.fs)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CubeReport {
    pub d: usize,
    pub schedule: Vec<usize>,
    /// `A_N` for each computed `N`.
    pub partials: Vec<Vec<f64>>,
    pub limit: Vec<f64>,
    pub integral: f64,
    /// `(∫f dμ)^{2^d}` when every vertex carries the same observable.
    pub power_bound: Option<f64>,
    /// `‖A_{N_j} − A_{N_{j−1}}‖₂`, with a leading 0.
    pub trace: Vec<f64>,
    pub exact: bool,
    pub converged: bool,
    /// First schedule index whose Cauchy difference is below the threshold.
    pub converged_at: Option<usize>,
    /// `‖L − L_alt‖₂` against the alternate Følner families, at the last index.
    pub cross_check: Option<f64>,
    pub warnings: Vec<String>,
}

fn l2(system: &FiniteSystem, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(system.weights())
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn integrate(system: &FiniteSystem, values: &[f64]) -> f64 {
    values.iter().zip(system.weights()).map(|(v, w)| v * w).sum()
}

/// The limit `L` of the cubic averages: exact for finite groups, otherwise
/// the last schedule index with its Cauchy trace and a cross-check against
/// the alternate Følner families.
pub fn cube_average_limit(req: &CubeAverageRequest) -> Result<CubeReport> {
    req.validate()?;
    let system = req.system;
    let d = req.d();
    let exact = req.families.iter().all(|f| f.averages_exactly());
    let power_bound = req
        .fs
        .windows(2)
        .all(|w| w[0].values == w[1].values)
        .then(|| system.integral(&req.fs[0]).powi(1 << d));

    let mut partials = Vec::new();
    let mut trace = Vec::new();
    let mut converged_at = None;
    let schedule = if exact { vec![1] } else { req.schedule.clone() };
    if schedule.is_empty() {
        return Err(Error::Precondition("the Følner schedule is empty".into()));
    }
    for (j, &n) in schedule.iter().enumerate() {
        let a = cube_average_with(req, &req.families, &vec![n; d])?.values;
        let diff = partials.last().map_or(0.0, |prev: &Vec<f64>| l2(system, prev, &a));
        if j > 0 && converged_at.is_none() && diff < CAUCHY_THRESHOLD {
            converged_at = Some(j);
        }
        trace.push(diff);
        partials.push(a);
    }
    let limit = partials.last().unwrap().clone();
    let cross_check = if exact {
        None
    } else {
        let alt: Vec<GroupModel> = req.families.iter().map(|f| f.alternate()).collect();
        let last = *schedule.last().unwrap();
        let a = cube_average_with(req, &alt, &vec![last; d])?.values;
        Some(l2(system, &limit, &a))
    };
    Ok(CubeReport {
        d,
        schedule,
        integral: integrate(system, &limit),
        partials,
        limit,
        power_bound,
        trace,
        exact,
        converged: exact || converged_at.is_some(),
        converged_at: if exact { Some(0) } else { converged_at },
        cross_check,
        warnings: req.warnings(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KhintchineReport {
    pub d: usize,
    pub integral: f64,
    pub power: f64,
    /// `c_k = ∫ ⊗f dμ^{(1..k)}` for `k = 0..d`; each step satisfies `c_k ≥ c_{k−1}²`.
    pub chain: Vec<f64>,
    pub chain_holds: bool,
    pub exact: bool,
    pub converged: bool,
    pub passed: bool,
}

/// `c_0 = ∫f dμ` and `c_k = ∫ ⊗f dμ^{(1..k)} = ∫ E(F_{k−1} | ℐ_k)² dμ^{(1..k−1)}`,
/// where `F_{k−1} = ⊗f` on `X^{2^{k−1}}`.
pub fn khintchine_chain(system: &FiniteSystem, f: &Observable, d: usize) -> Result<Vec<f64>> {
    let mut chain = vec![system.integral(f)];
    for k in 1..=d {
        let order: Vec<usize> = (0..k).collect();
        let j = build_joining(system, &order)?;
        chain.push(j.integral(&vec![f.clone(); 1 << k])?);
    }
    Ok(chain)
}

/// Checks `∫L dμ ≥ (∫f dμ)^{2^d} − 1e-10` for `f ≥ 0`, and the induction chain
/// behind it.
pub fn khintchine_bound_check(
    system: &FiniteSystem,
    f: &Observable,
    families: &[GroupModel],
    schedule: &[usize],
) -> Result<KhintchineReport> {
    if let Some(v) = f.values.iter().find(|v| **v < 0.0) {
        return Err(Error::Precondition(format!("observable `{}` takes the negative value {v}", f.name)));
    }
    let d = families.len();
    let req = CubeAverageRequest {
        system,
        fs: vec![f.clone(); 1 << d],
        families: families.to_vec(),
        schedule: schedule.to_vec(),
    };
    let report = cube_average_limit(&req)?;
    let power = system.integral(f).powi(1 << d);
    let chain = khintchine_chain(system, f, d)?;
    let mut chain_holds = chain.windows(2).all(|w| w[1] >= w[0] * w[0] - EXACT_TOLERANCE);
    if report.exact {
        chain_holds &= (chain[d] - report.integral).abs() <= EXACT_TOLERANCE;
    }
    Ok(KhintchineReport {
        d,
        integral: report.integral,
        power,
        chain,
        chain_holds,
        exact: report.exact,
        converged: report.converged,
        passed: report.integral >= power - EXACT_TOLERANCE && chain_holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IteratedStatus {
    Passed,
    Failed,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IteratedReport {
    /// Joint limit over `∏ Φ^(i)_N`.
    pub j: f64,
    /// Iterated limit, innermost over `g_d`.
    pub j_prime: f64,
    pub difference: f64,
    pub exact: bool,
    pub status: IteratedStatus,
}

/// Compares the joint limit `J` with the iterated limit `J'`.
///
/// `J'` averages the outer `d − 1` axes explicitly and takes the innermost
/// limit over `g_d` as the exact projection: with `g_1..g_{d−1}` fixed, the
/// integrand is `∫ F_0 · F_1 ∘ T^(d)_{g_d} dμ`, whose average over `g_d` tends to
/// `∫ F_0 · E(F_1 | ℐ_d) dμ`.
pub fn iterated_limit_check(req: &CubeAverageRequest) -> Result<IteratedReport> {
    req.validate()?;
    let d = req.d();
    if d == 0 {
        return Err(Error::Dimension("at least one action is needed".into()));
    }
    let system = req.system;
    let limit = cube_average_limit(req)?;
    let exact = limit.exact;
    let n = *limit.schedule.last().unwrap();
    let hists = req.histograms(&req.families[..d - 1], &vec![n; d - 1])?;
    let inner = system.invariant_partition(&[d - 1])?;
    let mut choice = Vec::new();
    let total: f64 = hists.iter().map(|h| h.iter().map(|(_, c)| *c as f64).sum::<f64>()).product();
    let j_prime = nested(system, &req.fs, &hists, &inner, &mut choice) / total;
    let difference = (limit.integral - j_prime).abs();
    let status = if difference <= EXACT_TOLERANCE {
        IteratedStatus::Passed
    } else if exact {
        IteratedStatus::Failed
    } else {
        IteratedStatus::Inconclusive
    };
    Ok(IteratedReport { j: limit.integral, j_prime, difference, exact, status })
}

fn nested<'a>(
    system: &FiniteSystem,
    fs: &[Observable],
    hists: &'a [Histogram],
    inner: &crate::system::Partition,
    choice: &mut Vec<&'a (crate::perm::Perm, u64)>,
) -> f64 {
    if choice.len() < hists.len() {
        let mut sum = 0.0;
        for entry in &hists[choice.len()] {
            choice.push(entry);
            sum += nested(system, fs, hists, inner, choice);
            choice.pop();
        }
        return sum;
    }
    let outer = hists.len();
    let half = 1usize << outer;
    let weight: f64 = choice.iter().map(|(_, c)| *c as f64).product();
    let n = system.len();
    let mut f0 = vec![1.0; n];
    let mut f1 = vec![1.0; n];
    for x in 0..n {
        for eps in 0..half {
            let y = (0..outer).filter(|j| eps >> j & 1 == 1).fold(x, |y, j| choice[j].0.apply(y));
            f0[x] *= fs[eps].values[y];
            f1[x] *= fs[eps | half].values[y];
        }
    }
    let e1 = system.cond_expect(&Observable::new("F1", f1), inner);
    weight * (0..n).map(|x| system.weights()[x] * f0[x] * e1.values[x]).sum::<f64>()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReturnSetReport {
    pub threshold: f64,
    pub window_shape: Vec<usize>,
    /// `∫ ∏_ε f ∘ R_h^ε dμ` for every window point, last axis fastest.
    pub values: Vec<f64>,
    pub members: Vec<Vec<Element>>,
    /// Side of the largest sub-cube of the window grid disjoint from the set.
    pub largest_gap: usize,
}

/// `R ∩ window` for `R = {h : ∫ ∏_ε f ∘ R_h^ε dμ > (∫f dμ)^{2^d} − c}`, the window
/// being a product of per-axis element lists.
pub fn return_set(system: &FiniteSystem, f: &Observable, c: f64, window: &[Vec<Element>]) -> Result<ReturnSetReport> {
    system.check_observable(f)?;
    if f.values.iter().any(|v| *v < 0.0) {
        return Err(Error::Precondition(format!("observable `{}` must be nonnegative", f.name)));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(Error::Precondition(format!("c = {c} must be positive")));
    }
    let d = window.len();
    if d == 0 || window.iter().any(|w| w.is_empty()) {
        return Err(Error::Window("the return-set window is empty".into()));
    }
    if d > system.d() {
        return Err(Error::ActionIndex { index: d - 1, d: system.d() });
    }
    for axis in window {
        for g in axis {
            system.group().check_element(g)?;
        }
    }
    let threshold = system.integral(f).powi(1 << d) - c;
    let shape: Vec<usize> = window.iter().map(|w| w.len()).collect();
    let perms: Vec<Vec<_>> = window
        .iter()
        .enumerate()
        .map(|(i, axis)| axis.iter().map(|g| system.element_perm(i, g)).collect())
        .collect();
    let fs = vec![f.clone(); 1 << d];
    let total: usize = shape.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut members = Vec::new();
    let mut mask = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let hists: Vec<Histogram> = (0..d).map(|i| vec![(perms[i][idx[i]].clone(), 1)]).collect();
        let v = integrate(system, &cube_pointwise(system.len(), &hists, &fs));
        let hit = v > threshold;
        if hit {
            members.push((0..d).map(|i| window[i][idx[i]].clone()).collect());
        }
        values.push(v);
        mask.push(hit);
        for axis in (0..d).rev() {
            idx[axis] += 1;
            if idx[axis] < shape[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    let largest_gap = largest_empty_cube(&mask, &shape);
    Ok(ReturnSetReport { threshold, window_shape: shape, values, members, largest_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Perm;
    use crate::system::tests::{rotation, swap_system};

    fn ind(n: usize, pts: &[usize]) -> Observable {
        Observable::indicator(n, pts)
    }

    #[test]
    fn constant_one_averages_to_one() {
        let sys = swap_system(2);
        let req = CubeAverageRequest::uniform(&sys, &Observable::constant(2, 1.0), 2, vec![1]);
        assert!(cube_average(&req, 1).unwrap().values.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn d1_is_f_times_projection() {
        let sys = rotation(6, 2, GroupModel::cyclic(3));
        let f = Observable::new("f", vec![0.1, 0.5, 0.2, 0.9, 0.4, 0.3]);
        let req = CubeAverageRequest::uniform(&sys, &f, 1, vec![1]);
        let a = cube_average(&req, 1).unwrap();
        let e = sys.cond_expect(&f, &sys.invariant_partition(&[0]).unwrap());
        for x in 0..6 {
            assert!((a.values[x] - f.values[x] * e.values[x]).abs() < 1e-15);
        }
    }

    #[test]
    fn two_swaps_indicator() {
        let sys = swap_system(2);
        let req = CubeAverageRequest::uniform(&sys, &ind(2, &[0]), 2, vec![1]);
        let a = cube_average(&req, 1).unwrap();
        assert!((sys.integral(&a) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn identity_actions_give_the_product() {
        let sys = FiniteSystem::uniform(3, GroupModel::cyclic(2), vec![vec![Perm::identity(3)]; 2]).unwrap();
        let fs: Vec<Observable> = (0..4).map(|e| Observable::new("f", vec![0.5 + e as f64, 1.0, -2.0])).collect();
        let r = cube_average_limit(&CubeAverageRequest::new(&sys, fs.clone(), vec![1])).unwrap();
        for x in 0..3 {
            let prod: f64 = fs.iter().map(|f| f.values[x]).product();
            assert!((r.limit[x] - prod).abs() < 1e-12);
        }
        assert!(r.exact && r.trace == vec![0.0]);
    }

    #[test]
    fn z_boxes_on_rotation() {
        let sys = rotation(5, 1, GroupModel::integers());
        let req = CubeAverageRequest::uniform(&sys, &ind(5, &[0]), 1, vec![250, 500, 1000, 2000]);
        let r = cube_average_limit(&req).unwrap();
        assert!((r.integral - 1.0 / 25.0).abs() < 1e-12, "{}", r.integral);
        assert!(r.converged);
        assert!(r.cross_check.unwrap() < 1e-12);
    }

    #[test]
    fn khintchine_examples() {
        let sys = swap_system(1);
        let r = khintchine_bound_check(&sys, &ind(2, &[0]), &[sys.group().clone()], &[1]).unwrap();
        assert!((r.integral - 0.25).abs() < 1e-15 && r.passed);

        let c = Observable::constant(2, 0.7);
        let r = khintchine_bound_check(&sys, &c, &[sys.group().clone()], &[1]).unwrap();
        assert!((r.integral - r.power).abs() < 1e-12);

        let id = FiniteSystem::uniform(2, GroupModel::cyclic(2), vec![vec![Perm::identity(2)]; 2]).unwrap();
        let f = Observable::new("f", vec![1.0, 0.0]);
        let r = khintchine_bound_check(&id, &f, &[id.group().clone(), id.group().clone()], &[1]).unwrap();
        assert!(r.integral > r.power + 0.1);
        assert!(khintchine_bound_check(&id, &Observable::new("g", vec![-1.0, 1.0]), &[id.group().clone()], &[1]).is_err());
    }

    #[test]
    fn iterated_identity_actions() {
        let sys = FiniteSystem::uniform(3, GroupModel::cyclic(2), vec![vec![Perm::identity(3)]; 2]).unwrap();
        let fs: Vec<Observable> = (0..4).map(|e| Observable::new("f", vec![0.5, e as f64, 2.0])).collect();
        let r = iterated_limit_check(&CubeAverageRequest::new(&sys, fs.clone(), vec![1])).unwrap();
        let prod: f64 = (0..3).map(|x| fs.iter().map(|f| f.values[x]).product::<f64>()).sum::<f64>() / 3.0;
        assert!((r.j - prod).abs() < 1e-12 && (r.j_prime - prod).abs() < 1e-12);
        assert_eq!(r.status, IteratedStatus::Passed);
    }

    #[test]
    fn return_set_of_swap() {
        let sys = swap_system(1);
        let window = vec![sys.group().elements().unwrap()];
        let r = return_set(&sys, &ind(2, &[0]), 0.3, &window).unwrap();
        assert_eq!(r.members.len(), 2);
        assert!((r.values[0] - 0.5).abs() < 1e-15 && r.values[1].abs() < 1e-15);
        assert_eq!(r.largest_gap, 0);
        assert!(return_set(&sys, &ind(2, &[0]), 0.3, &[vec![]]).is_err());
    }
}
