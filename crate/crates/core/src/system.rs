//! Finite measure-preserving systems with `d` commuting group actions.
//!
//! Actions are given on the group generators. A general element acts through
//! its normal-form decomposition into basis elements (see
//! [`GroupModel::decompose`]), so every built-in group is handled uniformly.
//! Action indices are zero-based throughout the API.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupModel, GroupSpec};
use crate::perm::{Cycles, Perm};

/// Tolerance for weight sums and measure preservation.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// A real function on the points of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub values: Vec<f64>,
}

impl Observable {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Observable {
        Observable { name: name.into(), values }
    }

    pub fn constant(n: usize, c: f64) -> Observable {
        Observable::new(format!("const:{c}"), vec![c; n])
    }

    pub fn indicator(n: usize, points: &[usize]) -> Observable {
        let mut values = vec![0.0; n];
        for &p in points {
            values[p] = 1.0;
        }
        Observable::new(format!("indicator:{points:?}"), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `x ↦ f(T x)`.
    pub fn compose(&self, t: &Perm) -> Observable {
        Observable::new(
            self.name.clone(),
            (0..self.len()).map(|x| self.values[t.apply(x)]).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Observable {
        Observable::new(self.name.clone(), self.values.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &Observable) -> Observable {
        Observable::new(
            self.name.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Observable) -> Observable {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Observable) -> Observable {
        Observable::new(
            self.name.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        )
    }
}

/// A partition of `0..n` into blocks, the finite form of a sub-σ-algebra.
/// Blocks are ordered by their smallest point; points inside a block ascend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds the partition whose blocks are the level sets of `labels`.
    pub fn from_labels<L: Eq + std::hash::Hash>(labels: &[L]) -> Partition {
        let mut ids: HashMap<&L, usize> = HashMap::new();
        let mut block_of = Vec::with_capacity(labels.len());
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (x, l) in labels.iter().enumerate() {
            let next = ids.len();
            let b = *ids.entry(l).or_insert(next);
            if b == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[b].push(x);
            block_of.push(b);
        }
        Partition { block_of, blocks }
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Partition> {
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &x in block {
                if x >= n || label[x] != usize::MAX {
                    return Err(Error::InvalidSystem(format!(
                        "partition blocks overlap or leave the space at point {x}"
                    )));
                }
                label[x] = b;
            }
        }
        if label.contains(&usize::MAX) {
            return Err(Error::InvalidSystem("partition blocks do not cover the space".into()));
        }
        Ok(Partition::from_labels(&label))
    }

    pub fn singletons(n: usize) -> Partition {
        Partition::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn whole(n: usize) -> Partition {
        Partition::from_labels(&vec![0u8; n])
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Common refinement: blocks are nonempty intersections of one block from each.
    pub fn join(&self, other: &Partition) -> Partition {
        let labels: Vec<(usize, usize)> =
            (0..self.len()).map(|x| (self.block_of[x], other.block_of[x])).collect();
        Partition::from_labels(&labels)
    }

    /// True when every block of `self` is a union of blocks of `finer`.
    pub fn is_coarser_than(&self, finer: &Partition) -> bool {
        finer.blocks.iter().all(|b| b.iter().all(|&x| self.block_of[x] == self.block_of[b[0]]))
    }
}

/// Union-find over `0..n`.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    pub(crate) fn labels(mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|x| self.find(x)).collect()
    }
}

/// One group action, stored on generators with derived basis data.
#[derive(Clone, Debug)]
struct Action {
    generators: Vec<Perm>,
    basis_cycles: Vec<Cycles>,
    // every element's permutation, finite groups only
    table: Option<Vec<Perm>>,
}

/// A finite probability space with `d` commuting measure-preserving actions of one group.
#[derive(Clone, Debug)]
pub struct FiniteSystem {
    labels: Vec<String>,
    weights: Vec<f64>,
    group: GroupModel,
    actions: Vec<Action>,
}

impl FiniteSystem {
    /// Validates and builds a system. `actions[i][k]` is the permutation by
    /// which the `k`-th group generator acts in the `i`-th action.
    pub fn new(
        labels: Vec<String>,
        weights: Vec<f64>,
        group: GroupModel,
        actions: Vec<Vec<Perm>>,
    ) -> Result<FiniteSystem> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidSystem("the point set is empty".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidSystem(format!(
                "{} labels for {n} weights",
                labels.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSystem("weights: every weight must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidSystem(format!("weights: total mass is {total}, expected 1")));
        }
        if actions.is_empty() {
            return Err(Error::InvalidSystem("at least one action is required".into()));
        }
        let gens = group.generators();
        let basis_words = group.basis_words();
        let mut built = Vec::with_capacity(actions.len());
        for (i, perms) in actions.into_iter().enumerate() {
            if perms.len() != gens.len() {
                return Err(Error::InvalidSystem(format!(
                    "action {i}: {} generator permutations for {} generators",
                    perms.len(),
                    gens.len()
                )));
            }
            for (k, p) in perms.iter().enumerate() {
                if p.len() != n {
                    return Err(Error::InvalidSystem(format!(
                        "bijection: action {i} generator {k} permutes {} points, expected {n}",
                        p.len()
                    )));
                }
                let inv = p.inverse();
                for y in 0..n {
                    if (weights[inv.apply(y)] - weights[y]).abs() > WEIGHT_TOLERANCE {
                        return Err(Error::InvalidSystem(format!(
                            "measure preservation: action {i} generator {k} moves weight at point {y}"
                        )));
                    }
                }
            }
            let basis: Vec<Perm> = basis_words
                .iter()
                .map(|w| {
                    w.iter().fold(Perm::identity(n), |acc, &(k, e)| {
                        acc.compose(&perms[k].cycles().power(e))
                    })
                })
                .collect();
            let mut action = Action {
                basis_cycles: basis.iter().map(|b| b.cycles()).collect(),
                generators: perms,
                table: None,
            };
            check_relations(&group, &action, i)?;
            if let Some(elems) = group.elements() {
                let table: Vec<Perm> =
                    elems.iter().map(|g| eval_word(&group, &action, g, n)).collect();
                action.table = Some(table);
                check_homomorphism(&group, &action, i)?;
            }
            built.push(action);
        }
        for i in 0..built.len() {
            for j in i + 1..built.len() {
                for (a, p) in built[i].generators.iter().enumerate() {
                    for (b, q) in built[j].generators.iter().enumerate() {
                        if !p.commutes_with(q) {
                            return Err(Error::InvalidSystem(format!(
                                "commutation: generator {a} of action {i} and generator {b} of action {j} do not commute"
                            )));
                        }
                    }
                }
            }
        }
        Ok(FiniteSystem { labels, weights, group, actions: built })
    }

    /// Unlabelled convenience constructor; points are named `0..n`.
    pub fn unlabelled(weights: Vec<f64>, group: GroupModel, actions: Vec<Vec<Perm>>) -> Result<FiniteSystem> {
        let labels = (0..weights.len()).map(|x| x.to_string()).collect();
        FiniteSystem::new(labels, weights, group, actions)
    }

    pub fn uniform(n: usize, group: GroupModel, actions: Vec<Vec<Perm>>) -> Result<FiniteSystem> {
        FiniteSystem::unlabelled(vec![1.0 / n as f64; n], group, actions)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of actions `d`.
    pub fn d(&self) -> usize {
        self.actions.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn point(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn generator_perms(&self, action: usize) -> &[Perm] {
        &self.actions[action].generators
    }

    pub fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.d() {
            return Err(Error::ActionIndex { index: action, d: self.d() });
        }
        Ok(())
    }

    pub fn check_observable(&self, f: &Observable) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Dimension(format!(
                "observable `{}` has {} values, system has {} points",
                f.name,
                f.len(),
                self.len()
            )));
        }
        if !f.is_finite() {
            return Err(Error::Dimension(format!("observable `{}` has non-finite values", f.name)));
        }
        Ok(())
    }

    /// The permutation `T^(action)_g`.
    pub fn element_perm(&self, action: usize, g: &Element) -> Perm {
        let act = &self.actions[action];
        match &act.table {
            Some(table) => table[g.0[0] as usize].clone(),
            None => eval_word(&self.group, act, g, self.len()),
        }
    }

    /// The system keeping only the first `d` actions.
    pub fn restrict_actions(&self, d: usize) -> Result<FiniteSystem> {
        if d == 0 || d > self.d() {
            return Err(Error::ActionIndex { index: d, d: self.d() });
        }
        let mut out = self.clone();
        out.actions.truncate(d);
        Ok(out)
    }

    /// The same system with a different Følner family for its group.
    pub fn with_group_model(&self, model: GroupModel) -> Result<FiniteSystem> {
        if !model.same_group(&self.group) {
            return Err(Error::InvalidSystem("replacement model has a different group".into()));
        }
        let mut out = self.clone();
        out.group = model;
        Ok(out)
    }

    pub fn integral(&self, f: &Observable) -> f64 {
        self.weights.iter().zip(&f.values).map(|(w, v)| w * v).sum()
    }

    pub fn inner(&self, f: &Observable, g: &Observable) -> f64 {
        self.weights.iter().zip(f.values.iter().zip(&g.values)).map(|(w, (a, b))| w * a * b).sum()
    }

    /// `‖f − g‖` in `L²(μ)`.
    pub fn l2_distance(&self, f: &Observable, g: &Observable) -> f64 {
        self.weights
            .iter()
            .zip(f.values.iter().zip(&g.values))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Orbits of the group generated by all `T^(i)_g`, `i ∈ indices`: the
    /// atoms of the σ-algebra of sets invariant under every listed action.
    pub fn invariant_partition(&self, indices: &[usize]) -> Result<Partition> {
        if indices.is_empty() {
            return Err(Error::IndexSequence("invariant partition needs at least one action".into()));
        }
        let mut uf = UnionFind::new(self.len());
        for &i in indices {
            self.check_action(i)?;
            for p in &self.actions[i].generators {
                for x in 0..self.len() {
                    uf.union(x, p.apply(x));
                }
            }
        }
        Ok(Partition::from_labels(&uf.labels()))
    }

    /// `E(f | p)`: weighted block averages; zero-mass blocks get 0.
    pub fn cond_expect(&self, f: &Observable, p: &Partition) -> Observable {
        let mut out = vec![0.0; self.len()];
        for block in p.blocks() {
            let mass: f64 = block.iter().map(|&x| self.weights[x]).sum();
            let first = f.values[block[0]];
            let value = if mass > 0.0 && block.iter().all(|&x| f.values[x] == first) {
                first
            } else if mass > 0.0 {
                block.iter().map(|&x| self.weights[x] * f.values[x]).sum::<f64>() / mass
            } else {
                0.0
            };
            for &x in block {
                out[x] = value;
            }
        }
        Observable::new(format!("E({}|·)", f.name), out)
    }

    /// Distinct permutations `T^(action)_g` for `g` in `elements`, with
    /// multiplicities, in order of first appearance.
    pub fn perm_histogram<'a>(
        &self,
        action: usize,
        elements: impl IntoIterator<Item = &'a Element>,
    ) -> Vec<(Perm, u64)> {
        let mut index: HashMap<Perm, usize> = HashMap::new();
        let mut out: Vec<(Perm, u64)> = Vec::new();
        for g in elements {
            let p = self.element_perm(action, g);
            match index.get(&p) {
                Some(&k) => out[k].1 += 1,
                None => {
                    index.insert(p.clone(), out.len());
                    out.push((p, 1));
                }
            }
        }
        out
    }

    pub(crate) fn average_over(&self, f: &Observable, hist: &[(Perm, u64)]) -> Vec<f64> {
        let total: u64 = hist.iter().map(|(_, c)| c).sum();
        let mut out = vec![0.0; self.len()];
        for (p, c) in hist {
            let c = *c as f64;
            for (x, o) in out.iter_mut().enumerate() {
                *o += c * f.values[p.apply(x)];
            }
        }
        out.iter().map(|v| v / total as f64).collect()
    }

    /// `(1/|Φ_N|) Σ_{g∈Φ_N} f ∘ T^(i)_g` along the system's Følner family.
    pub fn ergodic_average(&self, i: usize, f: &Observable, n: usize) -> Result<Observable> {
        self.ergodic_average_along(i, f, &self.group, n)
    }

    /// As [`FiniteSystem::ergodic_average`], along another family of the same group.
    pub fn ergodic_average_along(
        &self,
        i: usize,
        f: &Observable,
        family: &GroupModel,
        n: usize,
    ) -> Result<Observable> {
        self.check_action(i)?;
        self.check_observable(f)?;
        self.check_family(family)?;
        let set = family.folner_set(n)?;
        let hist = self.perm_histogram(i, &set);
        Ok(Observable::new(format!("A_{n}({})", f.name), self.average_over(f, &hist)))
    }

    /// `(1/|Φ_N|²) Σ_{g,h∈Φ_N} f ∘ T^(i)_{gh⁻¹}`; the family must be right or two-sided.
    pub fn two_sided_average(&self, i: usize, f: &Observable, n: usize) -> Result<Observable> {
        self.check_action(i)?;
        self.check_observable(f)?;
        if !self.group.sidedness().is_right() {
            return Err(Error::Precondition(
                "two-sided averages need a right or two-sided Følner family".into(),
            ));
        }
        let set = self.group.folner_set(n)?;
        let hist = self.quotient_histogram(i, &set)?;
        Ok(Observable::new(format!("A2_{n}({})", f.name), self.average_over(f, &hist)))
    }

    /// Histogram of `T^(i)_{gh⁻¹}` over pairs `g, h ∈ set`.
    pub(crate) fn quotient_histogram(&self, i: usize, set: &[Element]) -> Result<Vec<(Perm, u64)>> {
        let pairs = set.len().saturating_mul(set.len());
        if pairs > self.group.enumeration_limit() {
            return Err(Error::EnumerationBound { size: pairs, limit: self.group.enumeration_limit() });
        }
        let mut counts: HashMap<Element, u64> = HashMap::new();
        let mut order: Vec<Element> = Vec::new();
        for g in set {
            for h in set {
                let q = self.group.multiply(g, &self.group.inverse(h));
                let c = counts.entry(q.clone()).or_insert(0);
                if *c == 0 {
                    order.push(q);
                }
                *c += 1;
            }
        }
        let mut hist: Vec<(Perm, u64)> = Vec::new();
        let mut index: HashMap<Perm, usize> = HashMap::new();
        for q in &order {
            let p = self.element_perm(i, q);
            let c = counts[q];
            match index.get(&p) {
                Some(&k) => hist[k].1 += c,
                None => {
                    index.insert(p.clone(), hist.len());
                    hist.push((p, c));
                }
            }
        }
        Ok(hist)
    }

    pub(crate) fn check_family(&self, family: &GroupModel) -> Result<()> {
        if !family.same_group(&self.group) {
            return Err(Error::Precondition(format!(
                "Følner family is for {}, system group is {}",
                family.describe(),
                self.group.describe()
            )));
        }
        Ok(())
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            points: PointsSpec::Labels(self.labels.clone()),
            weights: Some(self.weights.iter().map(|&w| WeightSpec::Float(w)).collect()),
            group: GroupSpec::from_model(&self.group),
            actions: self
                .actions
                .iter()
                .map(|a| a.generators.iter().map(|p| p.images().to_vec()).collect())
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<FiniteSystem> {
        let spec: SystemSpec = serde_json::from_str(text)?;
        spec.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("system spec serializes")
    }
}

fn eval_word(group: &GroupModel, action: &Action, g: &Element, n: usize) -> Perm {
    group
        .decompose(g)
        .iter()
        .fold(Perm::identity(n), |acc, &(k, e)| acc.compose(&action.basis_cycles[k].power(e)))
}

fn check_relations(group: &GroupModel, action: &Action, i: usize) -> Result<()> {
    let gens = &action.generators;
    match group.kind() {
        GroupKind::Lattice { .. } => {
            for a in 0..gens.len() {
                for b in a + 1..gens.len() {
                    if !gens[a].commutes_with(&gens[b]) {
                        return Err(Error::InvalidSystem(format!(
                            "homomorphism: action {i} lattice generators {a} and {b} do not commute"
                        )));
                    }
                }
            }
        }
        GroupKind::Heisenberg => {
            let z = action.basis_cycles[2].power(1);
            if !z.commutes_with(&gens[0]) || !z.commutes_with(&gens[1]) {
                return Err(Error::InvalidSystem(format!(
                    "homomorphism: action {i} commutator of the Heisenberg generators is not central"
                )));
            }
        }
        GroupKind::Finite(_) => {}
    }
    Ok(())
}

fn check_homomorphism(group: &GroupModel, action: &Action, i: usize) -> Result<()> {
    let table = action.table.as_ref().expect("finite table");
    let elems = group.elements().expect("finite group");
    for (a, g) in elems.iter().enumerate() {
        for (b, h) in elems.iter().enumerate() {
            let gh = group.multiply(g, h).0[0] as usize;
            if table[gh] != table[a].compose(&table[b]) {
                return Err(Error::InvalidSystem(format!(
                    "homomorphism: action {i} violates T_(gh) = T_g T_h at g={a}, h={b}"
                )));
            }
        }
    }
    Ok(())
}

/// JSON system file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    pub points: PointsSpec,
    #[serde(default)]
    pub weights: Option<Vec<WeightSpec>>,
    pub group: GroupSpec,
    /// `actions[i][k]` is the image array of generator `k` under action `i`.
    pub actions: Vec<Vec<Vec<u32>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointsSpec {
    Count(usize),
    Labels(Vec<String>),
}

/// A weight written as a number or as an exact fraction `"p/q"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Float(f64),
    Text(String),
}

impl WeightSpec {
    pub fn value(&self) -> Result<f64> {
        match self {
            WeightSpec::Float(w) => Ok(*w),
            WeightSpec::Text(s) => {
                let parse = |t: &str| {
                    t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad weight `{s}`")))
                };
                match s.split_once('/') {
                    Some((p, q)) => {
                        let q = parse(q)?;
                        if q == 0.0 {
                            return Err(Error::Parse(format!("zero denominator in weight `{s}`")));
                        }
                        Ok(parse(p)? / q)
                    }
                    None => parse(s),
                }
            }
        }
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<FiniteSystem> {
        let labels = match &self.points {
            PointsSpec::Count(n) => (0..*n).map(|x| x.to_string()).collect(),
            PointsSpec::Labels(l) => l.clone(),
        };
        let n = labels.len();
        let weights = match &self.weights {
            Some(ws) => ws.iter().map(|w| w.value()).collect::<Result<Vec<f64>>>()?,
            None => vec![1.0 / n as f64; n],
        };
        let group = self.group.build()?;
        let mut actions = Vec::with_capacity(self.actions.len());
        for (i, gens) in self.actions.iter().enumerate() {
            let mut perms = Vec::with_capacity(gens.len());
            for (k, images) in gens.iter().enumerate() {
                let p = Perm::from_images(images.clone()).ok_or_else(|| {
                    Error::InvalidSystem(format!(
                        "bijection: action {i} generator {k} is not a permutation of the points"
                    ))
                })?;
                perms.push(p);
            }
            actions.push(perms);
        }
        FiniteSystem::new(labels, weights, group, actions)
    }
}
