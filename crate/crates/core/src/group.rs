//! Countable amenable groups with explicit Følner families.
//!
//! Three built-in group kinds are supported: finite groups given by a Cayley
//! table (Følner family `Φ_N = G`), the lattices `Z^m` with box families
//! `∏[a_i, a_i + N)`, and the discrete Heisenberg group with boxes
//! `{x^a y^b z^c : |a|,|b| ≤ N, |c| ≤ N²}`. Users may also attach an explicit
//! list of finite sets as the Følner family, together with its declared
//! sidedness.
//!
//! Elements are canonical normal forms ([`Element`]): the table index for
//! finite groups, integer coordinates for `Z^m`, and upper unitriangular
//! coordinates `(a, b, c)` for the Heisenberg group, with product
//! `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of elements any single enumeration may produce.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 1 << 22;

/// A group element in canonical normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub Vec<i64>);

impl Element {
    pub fn new(coords: impl Into<Vec<i64>>) -> Element {
        Element(coords.into())
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Which translations a Følner family is asymptotically invariant under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    Left,
    Right,
    TwoSided,
}

impl Sidedness {
    pub fn is_left(self) -> bool {
        matches!(self, Sidedness::Left | Sidedness::TwoSided)
    }

    pub fn is_right(self) -> bool {
        matches!(self, Sidedness::Right | Sidedness::TwoSided)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    generators: Vec<usize>,
    // words[g] lists generator positions whose left-to-right product is g
    words: Vec<Vec<usize>>,
}

/// Largest Cayley table accepted; associativity is verified exhaustively.
pub const MAX_FINITE_ORDER: usize = 512;

impl FiniteGroup {
    /// Validates the group axioms and builds the normal-form words. When
    /// `generators` is `None` a small generating set is chosen greedily.
    pub fn from_table(
        name: impl Into<String>,
        table: Vec<Vec<usize>>,
        generators: Option<Vec<usize>>,
    ) -> Result<FiniteGroup> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty Cayley table".into()));
        }
        if n > MAX_FINITE_ORDER {
            return Err(Error::InvalidGroup(format!(
                "order {n} exceeds the supported maximum {MAX_FINITE_ORDER}"
            )));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {i} has length {}", row.len())));
            }
            if row.iter().any(|&x| x >= n) {
                return Err(Error::InvalidGroup(format!("row {i} has an entry out of range")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("identity axiom fails: no two-sided identity".into()))?;
        let mut inverses = vec![usize::MAX; n];
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("inverse axiom fails for element {g}")))?;
            inverses[g] = inv;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }

        let generators = match generators {
            Some(gens) => {
                if gens.iter().any(|&g| g >= n) {
                    return Err(Error::InvalidGroup("generator index out of range".into()));
                }
                gens
            }
            None => greedy_generators(&table, identity),
        };
        let words = bfs_words(&table, identity, &generators).ok_or_else(|| {
            Error::InvalidGroup("the listed generators do not generate the group".into())
        })?;
        Ok(FiniteGroup { name: name.into(), table, identity, inverses, generators, words })
    }

    pub fn cyclic(n: usize) -> FiniteGroup {
        assert!(n >= 1, "cyclic group of order 0");
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let gens = if n == 1 { vec![] } else { vec![1] };
        FiniteGroup::from_table(format!("Z/{n}"), table, Some(gens)).expect("cyclic table is a group")
    }

    /// Direct product, elements indexed as `a * |b| + b`.
    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
        let (na, nb) = (a.order(), b.order());
        let table = (0..na * nb)
            .map(|x| {
                (0..na * nb)
                    .map(|y| a.table[x / nb][y / nb] * nb + b.table[x % nb][y % nb])
                    .collect()
            })
            .collect();
        let mut gens: Vec<usize> = a.generators.iter().map(|&g| g * nb + b.identity).collect();
        gens.extend(b.generators.iter().map(|&h| a.identity * nb + h));
        FiniteGroup::from_table(format!("{}x{}", a.name, b.name), table, Some(gens))
            .expect("direct product of groups is a group")
    }

    /// The symmetric group on three letters, elements ordered lexicographically
    /// by their image arrays.
    pub fn symmetric3() -> FiniteGroup {
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index([a[b[0]], a[b[1]], a[b[2]]]))
                    .collect()
            })
            .collect();
        FiniteGroup::from_table("S3", table, Some(vec![1, 3])).expect("S3 table is a group")
    }

    /// The Heisenberg group over `Z/n`, coordinates `(a, b, c)` indexed as
    /// `(a * n + b) * n + c`; generated by `x = (1,0,0)` and `y = (0,1,0)`.
    pub fn heisenberg_mod(n: usize) -> FiniteGroup {
        assert!(n >= 2);
        let enc = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let size = n * n * n;
        let table = (0..size)
            .map(|x| {
                let (a, b, c) = (x / (n * n), (x / n) % n, x % n);
                (0..size)
                    .map(|y| {
                        let (a2, b2, c2) = (y / (n * n), (y / n) % n, y % n);
                        enc((a + a2) % n, (b + b2) % n, (c + c2 + a * b2) % n)
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(
            format!("H3(Z/{n})"),
            table,
            Some(vec![enc(1, 0, 0), enc(0, 1, 0)]),
        )
        .expect("Heisenberg table is a group")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn word(&self, g: usize) -> &[usize] {
        &self.words[g]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// All subgroups generated by at most two elements, each sorted, deduplicated.
    pub fn small_subgroups(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut push = |s: Vec<usize>| {
            if !found.contains(&s) {
                found.push(s);
            }
        };
        for a in 0..n {
            for b in a..n {
                push(self.closure(&[a, b]));
            }
        }
        found.sort_by_key(|s| (s.len(), s.clone()));
        found
    }

    fn closure(&self, seeds: &[usize]) -> Vec<usize> {
        let mut members = vec![false; self.order()];
        members[self.identity] = true;
        let mut queue: VecDeque<usize> = VecDeque::from(vec![self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in seeds {
                let y = self.table[x][s];
                if !members[y] {
                    members[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order()).filter(|&x| members[x]).collect()
    }
}

fn greedy_generators(table: &[Vec<usize>], identity: usize) -> Vec<usize> {
    let n = table.len();
    let mut gens = Vec::new();
    let mut reached = vec![false; n];
    reached[identity] = true;
    for g in 0..n {
        if reached[g] {
            continue;
        }
        gens.push(g);
        // recompute the generated subgroup
        reached = vec![false; n];
        reached[identity] = true;
        let mut queue = VecDeque::from(vec![identity]);
        while let Some(x) = queue.pop_front() {
            for &s in &gens {
                let y = table[x][s];
                if !reached[y] {
                    reached[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    gens
}

fn bfs_words(table: &[Vec<usize>], identity: usize, gens: &[usize]) -> Option<Vec<Vec<usize>>> {
    let n = table.len();
    let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
    words[identity] = Some(Vec::new());
    let mut queue = VecDeque::from(vec![identity]);
    while let Some(x) = queue.pop_front() {
        for (k, &s) in gens.iter().enumerate() {
            let y = table[x][s];
            if words[y].is_none() {
                let mut w = words[x].clone().unwrap();
                w.push(k);
                words[y] = Some(w);
                queue.push_back(y);
            }
        }
    }
    words.into_iter().collect()
}

/// The underlying group of a model.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupKind {
    Finite(FiniteGroup),
    Lattice { rank: usize },
    Heisenberg,
}

/// Where the box `∏[a_i, a_i + N)` of a lattice family sits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anchor {
    /// `a_i` independent of `N`.
    Fixed { offset: Vec<i64> },
    /// `a_i = slope_i * N`: boxes that drift away from the origin.
    Linear { slope: Vec<i64> },
}

/// A Følner family, indexed by `N ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum FolnerFamily {
    /// `Φ_N = G` for a finite group.
    Whole,
    /// Lattice boxes of side `N`.
    Boxes(Anchor),
    /// Heisenberg boxes `{x^a y^b z^c : |a|,|b| ≤ N, |c| ≤ N²}`, left-translated by
    /// `x^{shift_slope · N}`.
    HeisenbergBoxes { shift_slope: i64 },
    /// User supplied sets; `Φ_N` is `sets[N - 1]`.
    Explicit(Vec<Vec<Element>>),
}

/// A group together with a Følner family and its sidedness.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupModel {
    kind: GroupKind,
    family: FolnerFamily,
    sidedness: Sidedness,
    enumeration_limit: usize,
}

impl GroupModel {
    pub fn finite(group: FiniteGroup) -> GroupModel {
        GroupModel {
            kind: GroupKind::Finite(group),
            family: FolnerFamily::Whole,
            sidedness: Sidedness::TwoSided,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    pub fn cyclic(n: usize) -> GroupModel {
        GroupModel::finite(FiniteGroup::cyclic(n))
    }

    /// `Z^rank` with boxes `[0, N)^rank`.
    pub fn lattice(rank: usize) -> GroupModel {
        assert!(rank >= 1, "lattice rank must be positive");
        GroupModel {
            kind: GroupKind::Lattice { rank },
            family: FolnerFamily::Boxes(Anchor::Fixed { offset: vec![0; rank] }),
            sidedness: Sidedness::TwoSided,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    pub fn integers() -> GroupModel {
        GroupModel::lattice(1)
    }

    pub fn heisenberg() -> GroupModel {
        GroupModel {
            kind: GroupKind::Heisenberg,
            family: FolnerFamily::HeisenbergBoxes { shift_slope: 0 },
            sidedness: Sidedness::TwoSided,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    /// Replaces the Følner family. Built-in families keep their known
    /// sidedness; explicit families take the declared one.
    pub fn with_family(&self, family: FolnerFamily, declared: Sidedness) -> Result<GroupModel> {
        let sidedness = match (&self.kind, &family) {
            (GroupKind::Finite(_), FolnerFamily::Whole) => Sidedness::TwoSided,
            (GroupKind::Lattice { rank }, FolnerFamily::Boxes(anchor)) => {
                let len = match anchor {
                    Anchor::Fixed { offset } => offset.len(),
                    Anchor::Linear { slope } => slope.len(),
                };
                if len != *rank {
                    return Err(Error::InvalidGroup(format!(
                        "box anchor has {len} coordinates, lattice rank is {rank}"
                    )));
                }
                Sidedness::TwoSided
            }
            (GroupKind::Heisenberg, FolnerFamily::HeisenbergBoxes { .. }) => Sidedness::TwoSided,
            (_, FolnerFamily::Explicit(sets)) => {
                if sets.is_empty() {
                    return Err(Error::InvalidGroup("explicit Følner family is empty".into()));
                }
                for (i, set) in sets.iter().enumerate() {
                    if set.is_empty() {
                        return Err(Error::InvalidGroup(format!("Følner set {} is empty", i + 1)));
                    }
                    let mut seen = HashSet::new();
                    for g in set {
                        self.check_element(g)?;
                        if !seen.insert(g) {
                            return Err(Error::InvalidGroup(format!(
                                "Følner set {} repeats element {g}",
                                i + 1
                            )));
                        }
                    }
                }
                declared
            }
            _ => return Err(Error::UnknownFamily("family does not match the group kind".into())),
        };
        Ok(GroupModel { kind: self.kind.clone(), family, sidedness, enumeration_limit: self.enumeration_limit })
    }

    pub fn with_enumeration_limit(mut self, limit: usize) -> GroupModel {
        self.enumeration_limit = limit;
        self
    }

    /// A second Følner family for the same group, used to cross-check that
    /// limits do not depend on the family. Lattice boxes drift as `[N, 2N)`,
    /// Heisenberg boxes are translated by `x^N`; finite groups have only `G`.
    pub fn alternate(&self) -> GroupModel {
        let family = match &self.kind {
            GroupKind::Finite(_) => FolnerFamily::Whole,
            GroupKind::Lattice { rank } => FolnerFamily::Boxes(Anchor::Linear { slope: vec![1; *rank] }),
            GroupKind::Heisenberg => FolnerFamily::HeisenbergBoxes { shift_slope: 1 },
        };
        self.with_family(family, Sidedness::TwoSided).expect("built-in family matches its kind")
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn family(&self) -> &FolnerFamily {
        &self.family
    }

    pub fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    pub fn enumeration_limit(&self) -> usize {
        self.enumeration_limit
    }

    pub fn same_group(&self, other: &GroupModel) -> bool {
        self.kind == other.kind
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GroupKind::Finite(_))
    }

    /// True when every Følner set is the whole (finite) group, so averages are exact.
    pub fn averages_exactly(&self) -> bool {
        matches!(self.family, FolnerFamily::Whole)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            GroupKind::Finite(g) => format!("finite group {} of order {}", g.name(), g.order()),
            GroupKind::Lattice { rank } => format!("Z^{rank}"),
            GroupKind::Heisenberg => "discrete Heisenberg group".to_string(),
        }
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            GroupKind::Finite(g) => Element(vec![g.identity() as i64]),
            GroupKind::Lattice { rank } => Element(vec![0; *rank]),
            GroupKind::Heisenberg => Element(vec![0, 0, 0]),
        }
    }

    pub fn generators(&self) -> Vec<Element> {
        match &self.kind {
            GroupKind::Finite(g) => g.generators().iter().map(|&s| Element(vec![s as i64])).collect(),
            GroupKind::Lattice { rank } => (0..*rank)
                .map(|i| {
                    let mut c = vec![0; *rank];
                    c[i] = 1;
                    Element(c)
                })
                .collect(),
            GroupKind::Heisenberg => vec![Element(vec![1, 0, 0]), Element(vec![0, 1, 0])],
        }
    }

    pub fn check_element(&self, g: &Element) -> Result<()> {
        let bad = |reason: &str| Error::BadElement { element: g.to_string(), reason: reason.into() };
        match &self.kind {
            GroupKind::Finite(grp) => {
                if g.0.len() != 1 || g.0[0] < 0 || g.0[0] as usize >= grp.order() {
                    return Err(bad("expected a table index"));
                }
            }
            GroupKind::Lattice { rank } => {
                if g.0.len() != *rank {
                    return Err(bad("wrong number of lattice coordinates"));
                }
            }
            GroupKind::Heisenberg => {
                if g.0.len() != 3 {
                    return Err(bad("expected Heisenberg coordinates (a, b, c)"));
                }
            }
        }
        Ok(())
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Element {
        match &self.kind {
            GroupKind::Finite(grp) => {
                Element(vec![grp.multiply(g.0[0] as usize, h.0[0] as usize) as i64])
            }
            GroupKind::Lattice { .. } => Element(g.0.iter().zip(&h.0).map(|(a, b)| a + b).collect()),
            GroupKind::Heisenberg => {
                let (a, b, c) = (g.0[0], g.0[1], g.0[2]);
                let (a2, b2, c2) = (h.0[0], h.0[1], h.0[2]);
                Element(vec![a + a2, b + b2, c + c2 + a * b2])
            }
        }
    }

    pub fn inverse(&self, g: &Element) -> Element {
        match &self.kind {
            GroupKind::Finite(grp) => Element(vec![grp.inverse(g.0[0] as usize) as i64]),
            GroupKind::Lattice { .. } => Element(g.0.iter().map(|a| -a).collect()),
            GroupKind::Heisenberg => {
                let (a, b, c) = (g.0[0], g.0[1], g.0[2]);
                Element(vec![-a, -b, -c + a * b])
            }
        }
    }

    /// Basis elements as words `(generator position, exponent)` in the generators.
    /// For the Heisenberg group the third basis element is the commutator
    /// `z = x y x⁻¹ y⁻¹`.
    pub fn basis_words(&self) -> Vec<Vec<(usize, i64)>> {
        match &self.kind {
            GroupKind::Finite(g) => (0..g.generators().len()).map(|k| vec![(k, 1)]).collect(),
            GroupKind::Lattice { rank } => (0..*rank).map(|k| vec![(k, 1)]).collect(),
            GroupKind::Heisenberg => {
                vec![vec![(0, 1)], vec![(1, 1)], vec![(0, 1), (1, 1), (0, -1), (1, -1)]]
            }
        }
    }

    /// Writes `g` as a product of powers of basis elements, left to right.
    pub fn decompose(&self, g: &Element) -> Vec<(usize, i64)> {
        match &self.kind {
            GroupKind::Finite(grp) => grp.word(g.0[0] as usize).iter().map(|&k| (k, 1)).collect(),
            GroupKind::Lattice { .. } => {
                g.0.iter().enumerate().filter(|(_, &e)| e != 0).map(|(k, &e)| (k, e)).collect()
            }
            GroupKind::Heisenberg => {
                // (a, b, c) = x^a y^b z^{c - ab}
                let (a, b, c) = (g.0[0], g.0[1], g.0[2]);
                vec![(0, a), (1, b), (2, c - a * b)]
            }
        }
    }

    /// All elements, finite groups only.
    pub fn elements(&self) -> Option<Vec<Element>> {
        match &self.kind {
            GroupKind::Finite(g) => Some((0..g.order()).map(|x| Element(vec![x as i64])).collect()),
            _ => None,
        }
    }

    /// `|Φ_N|` without enumerating.
    pub fn folner_size(&self, n: usize) -> Result<usize> {
        self.check_index(n)?;
        Ok(match (&self.kind, &self.family) {
            (GroupKind::Finite(g), FolnerFamily::Whole) => g.order(),
            (GroupKind::Lattice { rank }, FolnerFamily::Boxes(_)) => {
                n.checked_pow(*rank as u32).unwrap_or(usize::MAX)
            }
            (GroupKind::Heisenberg, FolnerFamily::HeisenbergBoxes { .. }) => {
                (2 * n + 1).saturating_mul(2 * n + 1).saturating_mul(2 * n * n + 1)
            }
            (_, FolnerFamily::Explicit(sets)) => sets[n - 1].len(),
            _ => unreachable!("family validated at construction"),
        })
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::FolnerIndex { index: n, reason: "indices start at 1".into() });
        }
        if let FolnerFamily::Explicit(sets) = &self.family {
            if n > sets.len() {
                return Err(Error::FolnerIndex {
                    index: n,
                    reason: format!("explicit family has only {} sets", sets.len()),
                });
            }
        }
        Ok(())
    }

    /// `Φ_N` in a deterministic order, duplicate-free.
    pub fn folner_set(&self, n: usize) -> Result<Vec<Element>> {
        let size = self.folner_size(n)?;
        if size > self.enumeration_limit {
            return Err(Error::EnumerationBound { size, limit: self.enumeration_limit });
        }
        Ok(match (&self.kind, &self.family) {
            (GroupKind::Finite(_), FolnerFamily::Whole) => self.elements().unwrap(),
            (GroupKind::Lattice { rank }, FolnerFamily::Boxes(anchor)) => {
                let lo: Vec<i64> = match anchor {
                    Anchor::Fixed { offset } => offset.clone(),
                    Anchor::Linear { slope } => slope.iter().map(|s| s * n as i64).collect(),
                };
                box_points(&lo, &vec![n; *rank])
            }
            (GroupKind::Heisenberg, FolnerFamily::HeisenbergBoxes { shift_slope }) => {
                let n = n as i64;
                let shift = Element(vec![shift_slope * n, 0, 0]);
                let mut out = Vec::with_capacity(size);
                for a in -n..=n {
                    for b in -n..=n {
                        for c in -n * n..=n * n {
                            out.push(self.multiply(&shift, &Element(vec![a, b, c])));
                        }
                    }
                }
                out
            }
            (_, FolnerFamily::Explicit(sets)) => sets[n - 1].clone(),
            _ => unreachable!("family validated at construction"),
        })
    }

    /// `|Φ_N Δ gΦ_N| / |Φ_N|` (left) or `|Φ_N Δ Φ_N g| / |Φ_N|` (right).
    pub fn folner_defect(&self, n: usize, g: &Element, side: Side) -> Result<f64> {
        self.check_element(g)?;
        let set = self.folner_set(n)?;
        Ok(translation_defect(self, &set, g, side))
    }
}

/// `|S Δ gS| / |S|` or `|S Δ Sg| / |S|` for an explicit finite set.
pub fn translation_defect(model: &GroupModel, set: &[Element], g: &Element, side: Side) -> f64 {
    let members: HashSet<&Element> = set.iter().collect();
    let escaped = set
        .iter()
        .filter(|x| {
            let y = match side {
                Side::Left => model.multiply(g, x),
                Side::Right => model.multiply(x, g),
            };
            !members.contains(&y)
        })
        .count();
    // |gS \ S| = |S \ gS| since translation is a bijection
    2.0 * escaped as f64 / set.len() as f64
}

/// All integer points of the box `∏[lo_i, lo_i + side_i)`, last coordinate fastest.
pub fn box_points(lo: &[i64], side: &[usize]) -> Vec<Element> {
    let total: usize = side.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; side.len()];
    if total == 0 {
        return out;
    }
    loop {
        out.push(Element(lo.iter().zip(&idx).map(|(l, &i)| l + i as i64).collect()));
        let mut axis = side.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < side[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// `G^d` with the product Følner family `F_N = Φ^(1)_N × … × Φ^(d)_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGroupModel {
    factors: Vec<GroupModel>,
}

impl ProductGroupModel {
    pub fn new(factors: Vec<GroupModel>) -> Result<ProductGroupModel> {
        if factors.is_empty() {
            return Err(Error::InvalidGroup("a product needs at least one factor".into()));
        }
        Ok(ProductGroupModel { factors })
    }

    /// `d` copies of the same factor.
    pub fn power(factor: GroupModel, d: usize) -> Result<ProductGroupModel> {
        ProductGroupModel::new(vec![factor; d])
    }

    pub fn factors(&self) -> &[GroupModel] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn identity(&self) -> Vec<Element> {
        self.factors.iter().map(|f| f.identity()).collect()
    }

    pub fn multiply(&self, g: &[Element], h: &[Element]) -> Vec<Element> {
        self.factors.iter().zip(g.iter().zip(h)).map(|(f, (a, b))| f.multiply(a, b)).collect()
    }

    pub fn inverse(&self, g: &[Element]) -> Vec<Element> {
        self.factors.iter().zip(g).map(|(f, a)| f.inverse(a)).collect()
    }

    pub fn folner_size(&self, n: usize) -> Result<usize> {
        let mut total = 1usize;
        for f in &self.factors {
            total = total.saturating_mul(f.folner_size(n)?);
        }
        Ok(total)
    }

    /// Per-axis Følner sets; the product set is their cartesian product.
    pub fn folner_axes(&self, n: usize) -> Result<Vec<Vec<Element>>> {
        let size = self.folner_size(n)?;
        let limit = self.factors.iter().map(|f| f.enumeration_limit()).min().unwrap();
        if size > limit {
            return Err(Error::EnumerationBound { size, limit });
        }
        self.factors.iter().map(|f| f.folner_set(n)).collect()
    }

    /// `F_N` enumerated, last axis fastest.
    pub fn folner_set(&self, n: usize) -> Result<Vec<Vec<Element>>> {
        let axes = self.folner_axes(n)?;
        Ok(cartesian(&axes))
    }
}

/// Cartesian product of per-axis element lists, last axis fastest.
pub fn cartesian(axes: &[Vec<Element>]) -> Vec<Vec<Element>> {
    let sides: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let idx = box_points(&vec![0; sides.len()], &sides);
    idx.into_iter()
        .map(|p| p.0.iter().enumerate().map(|(axis, &i)| axes[axis][i as usize].clone()).collect())
        .collect()
}

/// JSON group description: `{ "family": ..., "params": {...} }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum GroupSpec {
    #[serde(rename = "finite")]
    Finite {
        table: Vec<Vec<usize>>,
        #[serde(default)]
        generators: Option<Vec<usize>>,
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        folner: Option<ExplicitFamilySpec>,
    },
    #[serde(rename = "Zm")]
    Lattice {
        rank: usize,
        #[serde(default)]
        anchor: Option<Anchor>,
        #[serde(default)]
        folner: Option<ExplicitFamilySpec>,
    },
    #[serde(rename = "heisenberg")]
    Heisenberg {
        #[serde(default)]
        shift_slope: i64,
        #[serde(default)]
        folner: Option<ExplicitFamilySpec>,
    },
}

/// A user supplied Følner family with its declared sidedness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitFamilySpec {
    pub sets: Vec<Vec<Element>>,
    pub sidedness: Sidedness,
}

impl GroupSpec {
    pub fn from_json(text: &str) -> Result<GroupSpec> {
        // surface unknown families with their name rather than serde's variant list
        let raw: serde_json::Value = serde_json::from_str(text)?;
        if let Some(family) = raw.get("family").and_then(|f| f.as_str()) {
            if !matches!(family, "finite" | "Zm" | "heisenberg") {
                return Err(Error::UnknownFamily(family.to_string()));
            }
        }
        Ok(serde_json::from_value(raw)?)
    }

    pub fn build(&self) -> Result<GroupModel> {
        let (base, explicit) = match self {
            GroupSpec::Finite { table, generators, name, folner } => {
                let g = FiniteGroup::from_table(
                    name.clone().unwrap_or_else(|| format!("G{}", table.len())),
                    table.clone(),
                    generators.clone(),
                )?;
                (GroupModel::finite(g), folner)
            }
            GroupSpec::Lattice { rank, anchor, folner } => {
                if *rank == 0 {
                    return Err(Error::InvalidGroup("lattice rank must be positive".into()));
                }
                let mut m = GroupModel::lattice(*rank);
                if let Some(anchor) = anchor {
                    m = m.with_family(FolnerFamily::Boxes(anchor.clone()), Sidedness::TwoSided)?;
                }
                (m, folner)
            }
            GroupSpec::Heisenberg { shift_slope, folner } => {
                let m = GroupModel::heisenberg().with_family(
                    FolnerFamily::HeisenbergBoxes { shift_slope: *shift_slope },
                    Sidedness::TwoSided,
                )?;
                (m, folner)
            }
        };
        match explicit {
            Some(spec) => base.with_family(FolnerFamily::Explicit(spec.sets.clone()), spec.sidedness),
            None => Ok(base),
        }
    }

    pub fn from_model(model: &GroupModel) -> GroupSpec {
        let explicit = match model.family() {
            FolnerFamily::Explicit(sets) => {
                Some(ExplicitFamilySpec { sets: sets.clone(), sidedness: model.sidedness() })
            }
            _ => None,
        };
        match model.kind() {
            GroupKind::Finite(g) => GroupSpec::Finite {
                table: g.table().to_vec(),
                generators: Some(g.generators().to_vec()),
                name: Some(g.name().to_string()),
                folner: explicit,
            },
            GroupKind::Lattice { rank } => GroupSpec::Lattice {
                rank: *rank,
                anchor: match model.family() {
                    FolnerFamily::Boxes(a) => Some(a.clone()),
                    _ => None,
                },
                folner: explicit,
            },
            GroupKind::Heisenberg => GroupSpec::Heisenberg {
                shift_slope: match model.family() {
                    FolnerFamily::HeisenbergBoxes { shift_slope } => *shift_slope,
                    _ => 0,
                },
                folner: explicit,
            },
        }
    }
}

/// Index of every element in a list, for membership tests.
pub fn index_map(elements: &[Element]) -> HashMap<Element, usize> {
    elements.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect()
}
