//! Set partitions of `[n]`, mass partitions, hierarchies and the
//! exchangeability predicates defined on finite measures over partitions.
//!
//! Labels are 1-based throughout: a partition of `[n]` partitions
//! `{1, ..., n}`. Blocks are stored sorted and listed by least element, so
//! structural equality is equality of partitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set for which [`enumerate_partitions`] runs.
pub const MAX_ENUMERATION_N: usize = 12;

/// Absolute tolerance used whenever two probabilities are compared.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A partition of `[n]` with blocks ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition of `[n]`, sorting each block and ordering blocks by
    /// least element.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("partition ground set must be non-empty"));
        }
        let mut seen = vec![false; n + 1];
        let mut blocks = blocks;
        for block in blocks.iter_mut() {
            if block.is_empty() {
                return Err(Error::arg("partition blocks must be non-empty"));
            }
            block.sort_unstable();
            for &x in block.iter() {
                if x == 0 || x > n {
                    return Err(Error::arg(format!("label {x} outside [1, {n}]")));
                }
                if seen[x] {
                    return Err(Error::arg(format!("label {x} appears twice")));
                }
                seen[x] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::arg("blocks do not cover [n]"));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { n, blocks })
    }

    /// The value partition of a label sequence: positions `r` and `r'`
    /// (1-based) share a block iff `values[r-1] == values[r'-1]`.
    pub fn from_values<T: Eq + std::hash::Hash>(values: &[T]) -> Result<Self> {
        let mut index: std::collections::HashMap<&T, usize> = Default::default();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (pos, v) in values.iter().enumerate() {
            let next = blocks.len();
            let b = *index.entry(v).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(pos + 1);
        }
        // First-appearance order is already least-element order.
        Partition::new(values.len(), blocks)
    }

    /// The one-block partition `1_[n]`.
    pub fn trivial(n: usize) -> Self {
        Partition {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    /// The partition into singletons `0_[n]`.
    pub fn singletons(n: usize) -> Self {
        Partition {
            n,
            blocks: (1..=n).map(|i| vec![i]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Index (0-based, least-element order) of the block holding `label`.
    pub fn block_of(&self, label: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&label).is_ok())
    }

    /// Block sizes in least-element order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block sizes sorted non-increasingly.
    pub fn block_size_multiset(&self) -> Vec<usize> {
        let mut s = self.block_sizes();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// The traces `block ∩ [m]`, reordered by least element.
    pub fn restrict(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n {
            return Err(Error::arg(format!(
                "restriction size {m} outside [1, {}]",
                self.n
            )));
        }
        let blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| b.iter().copied().filter(|&x| x <= m).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        // Traces keep their least elements, so the order is preserved.
        Ok(Partition { n: m, blocks })
    }

    /// The index `j` of the cylinder class `P^{{[j],{j+1}}}` containing this
    /// partition, i.e. `min π₂ − 1`; `None` for the trivial partition.
    pub fn restricted_class(&self) -> Option<usize> {
        self.blocks.get(1).map(|b| b[0] - 1)
    }

    /// Images of the blocks under the increasing bijection `[n] → labels`.
    pub fn push_forward(&self, labels: &[usize]) -> Result<Vec<Vec<usize>>> {
        if labels.len() != self.n {
            return Err(Error::arg("push-forward label set has the wrong size"));
        }
        Ok(self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&i| labels[i - 1]).collect())
            .collect())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, x) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses the canonical text form, e.g. `"1 3|2"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in s.trim().split('|') {
            let block = part
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::arg(format!("bad label {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        let n = blocks.iter().map(Vec::len).sum();
        Partition::new(n, blocks)
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn restrict_partition(p: &Partition, m: usize) -> Result<Partition> {
    p.restrict(m)
}

pub fn block_size_multiset(p: &Partition) -> Vec<usize> {
    p.block_size_multiset()
}

/// All partitions of `[n]`, generated from restricted growth strings.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::Resource(format!(
            "exhaustive enumeration supports 1 <= n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(pos: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Partition>) {
        let n = rgs.len();
        if pos == n {
            let mut blocks = vec![Vec::new(); max + 1];
            for (i, &b) in rgs.iter().enumerate() {
                blocks[b].push(i + 1);
            }
            out.push(Partition { n, blocks });
            return;
        }
        for b in 0..=max + 1 {
            rgs[pos] = b;
            rec(pos + 1, max.max(b), rgs, out);
        }
    }
    if n == 1 {
        return Ok(vec![Partition::trivial(1)]);
    }
    rgs[0] = 0;
    rec(1, 0, &mut rgs, &mut out);
    Ok(out)
}

/// A finitely supported element of `S↓`: non-increasing positive atoms with
/// total at most one; the deficit is dust.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassPartition {
    atoms: Vec<f64>,
}

impl MassPartition {
    /// Zero atoms are dropped; atoms are sorted non-increasingly.
    pub fn new(atoms: Vec<f64>) -> Result<Self> {
        let mut atoms: Vec<f64> = atoms.into_iter().filter(|&a| a != 0.0).collect();
        if atoms.iter().any(|a| !a.is_finite() || *a < 0.0 || *a > 1.0) {
            return Err(Error::arg("mass partition atoms must lie in (0, 1]"));
        }
        let total: f64 = atoms.iter().sum();
        if total > 1.0 + WEIGHT_TOL {
            return Err(Error::arg(format!("atoms sum to {total} > 1")));
        }
        atoms.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(MassPartition { atoms })
    }

    /// `s₀ = 1`, no atoms.
    pub fn dust_only() -> Self {
        MassPartition { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    /// Number of positive atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `s₀ = 1 − Σ sᵢ`, clamped to `[0, 1]`; values below the comparison
    /// tolerance count as zero.
    pub fn dust(&self) -> f64 {
        let d = 1.0 - self.atoms.iter().sum::<f64>();
        if d < WEIGHT_TOL {
            0.0
        } else {
            d.min(1.0)
        }
    }

    pub fn is_conservative(&self) -> bool {
        self.dust() == 0.0
    }

    /// True for `(0, 0, ...)` and `(1, 0, ...)`.
    pub fn is_degenerate(&self) -> bool {
        self.atoms.is_empty() || (self.atoms.len() == 1 && (self.atoms[0] - 1.0).abs() < WEIGHT_TOL)
    }

    pub fn approx_eq(&self, other: &MassPartition) -> bool {
        self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| (a - b).abs() <= WEIGHT_TOL)
    }
}

impl TryFrom<Vec<f64>> for MassPartition {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MassPartition::new(v)
    }
}

impl From<MassPartition> for Vec<f64> {
    fn from(m: MassPartition) -> Vec<f64> {
        m.atoms
    }
}

/// A laminar family of subsets of `[n]` containing `∅`, `[n]` and every
/// singleton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hierarchy {
    n: usize,
    members: BTreeSet<Vec<usize>>,
}

impl Hierarchy {
    pub fn new(n: usize, members: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("hierarchy ground set must be non-empty"));
        }
        let mut set = BTreeSet::new();
        for mut m in members {
            m.sort_unstable();
            m.dedup();
            if m.iter().any(|&x| x == 0 || x > n) {
                return Err(Error::arg("hierarchy member outside [n]"));
            }
            set.insert(m);
        }
        set.insert(Vec::new());
        if !set.contains(&(1..=n).collect::<Vec<_>>()) {
            return Err(Error::arg("hierarchy must contain [n]"));
        }
        for i in 1..=n {
            if !set.contains(&vec![i]) {
                return Err(Error::arg(format!("hierarchy must contain {{{i}}}")));
            }
        }
        let list: Vec<&Vec<usize>> = set.iter().collect();
        for (a_idx, a) in list.iter().enumerate() {
            for b in &list[a_idx + 1..] {
                let inter = intersection_len(a, b);
                if inter != 0 && inter != a.len() && inter != b.len() {
                    return Err(Error::arg(format!("members {a:?} and {b:?} overlap")));
                }
            }
        }
        Ok(Hierarchy { n, members: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Members including the empty set, in lexicographic order.
    pub fn members(&self) -> &BTreeSet<Vec<usize>> {
        &self.members
    }

    pub fn contains(&self, b: &[usize]) -> bool {
        let mut v = b.to_vec();
        v.sort_unstable();
        self.members.contains(&v)
    }

    /// `{B ∩ [m] : B ∈ h}`.
    pub fn restrict(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n {
            return Err(Error::arg(format!(
                "restriction size {m} outside [1, {}]",
                self.n
            )));
        }
        let members = self
            .members
            .iter()
            .map(|b| b.iter().copied().filter(|&x| x <= m).collect::<Vec<_>>())
            .collect::<BTreeSet<_>>();
        Ok(Hierarchy { n: m, members })
    }

    /// The maximal strict subsets of `b` in the hierarchy, ordered by least
    /// element.
    pub fn children_of(&self, b: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut b = b.to_vec();
        b.sort_unstable();
        if !self.members.contains(&b) {
            return Err(Error::arg(format!("{b:?} is not a member")));
        }
        if b.len() < 2 {
            return Err(Error::arg("children are defined for blocks of size >= 2"));
        }
        let strict: Vec<&Vec<usize>> = self
            .members
            .iter()
            .filter(|a| !a.is_empty() && a.len() < b.len() && is_subset(a, &b))
            .collect();
        let mut children: Vec<Vec<usize>> = strict
            .iter()
            .filter(|a| {
                !strict
                    .iter()
                    .any(|c| c.len() > a.len() && is_subset(a, c))
            })
            .map(|a| (*a).clone())
            .collect();
        children.sort_unstable_by_key(|c| c[0]);
        Ok(children)
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for m in self.members.iter().filter(|m| !m.is_empty()) {
            if !first {
                f.write_str("|")?;
            }
            first = false;
            let s: Vec<String> = m.iter().map(|x| x.to_string()).collect();
            f.write_str(&s.join(" "))?;
        }
        Ok(())
    }
}

pub fn restrict_hierarchy(h: &Hierarchy, m: usize) -> Result<Hierarchy> {
    h.restrict(m)
}

pub fn children_of(h: &Hierarchy, b: &[usize]) -> Result<Vec<Vec<usize>>> {
    h.children_of(b)
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    intersection_len(a, b) == a.len()
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// A measure on `P_n` given by its point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasureOnPartitions {
    n: usize,
    weights: BTreeMap<Partition, f64>,
}

impl FiniteMeasureOnPartitions {
    pub fn new(n: usize, weights: BTreeMap<Partition, f64>) -> Result<Self> {
        for (p, w) in &weights {
            if p.n() != n {
                return Err(Error::arg(format!("{p} is not a partition of [{n}]")));
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::arg(format!("weight {w} at {p} is not finite and >= 0")));
            }
        }
        Ok(FiniteMeasureOnPartitions { n, weights })
    }

    /// Builds the measure from a weight function evaluated on all of `P_n`.
    pub fn from_fn(n: usize, mut f: impl FnMut(&Partition) -> f64) -> Result<Self> {
        let weights = enumerate_partitions(n)?
            .into_iter()
            .map(|p| {
                let w = f(&p);
                (p, w)
            })
            .collect();
        Self::new(n, weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &BTreeMap<Partition, f64> {
        &self.weights
    }

    pub fn weight(&self, p: &Partition) -> Option<f64> {
        self.weights.get(p).copied()
    }
}

/// Which symmetry classes a measure on `P_n` is invariant under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeabilityFlags {
    pub exchangeable: bool,
    pub partially_exchangeable: bool,
    pub restricted_exchangeable: bool,
}

/// Tests the three symmetry notions. Restricted exchangeability uses the
/// cylinder classes `P^{{[j],{j+1}}} ∩ P_n`, `j = 1..n−1`, with `1_[n]` in a
/// class of its own.
pub fn classify_exchangeability(mu: &FiniteMeasureOnPartitions) -> Result<ExchangeabilityFlags> {
    let all = enumerate_partitions(mu.n())?;
    if all.len() != mu.weights().len() {
        return Err(Error::arg(format!(
            "measure defines {} of the {} partitions of [{}]",
            mu.weights().len(),
            all.len(),
            mu.n()
        )));
    }
    let constant_on = |key: &dyn Fn(&Partition) -> Vec<usize>| -> bool {
        let mut first: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (p, &w) in mu.weights() {
            let k = key(p);
            match first.get(&k) {
                Some(&w0) if (w - w0).abs() > WEIGHT_TOL => return false,
                Some(_) => {}
                None => {
                    first.insert(k, w);
                }
            }
        }
        true
    };
    let exchangeable = constant_on(&|p| p.block_size_multiset());
    let partially_exchangeable = constant_on(&|p| p.block_sizes());
    let restricted_exchangeable = constant_on(&|p| {
        let mut k = vec![p.restricted_class().unwrap_or(0)];
        k.extend(p.block_size_multiset());
        k
    });
    Ok(ExchangeabilityFlags {
        exchangeable,
        partially_exchangeable,
        restricted_exchangeable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(p("1 3|2").restrict(2).unwrap(), p("1|2"));
        assert_eq!(p("1 2 3").restrict(3).unwrap(), p("1 2 3"));
        assert_eq!(p("1 4|2 3").restrict(3).unwrap(), p("1|2 3"));
        assert!(p("1 2").restrict(0).is_err());
        assert!(p("1 2").restrict(3).is_err());
    }

    #[test]
    fn multisets() {
        assert_eq!(p("1 3|2").block_size_multiset(), vec![2, 1]);
        assert_eq!(p("1|2|3").block_size_multiset(), vec![1, 1, 1]);
        assert_eq!(p("1 2|3 4|5").block_size_multiset(), vec![2, 2, 1]);
    }

    #[test]
    fn text_form_round_trip() {
        let q = Partition::new(4, vec![vec![4, 1], vec![3, 2]]).unwrap();
        assert_eq!(q.to_string(), "1 4|2 3");
        assert_eq!(q.to_string().parse::<Partition>().unwrap(), q);
        assert!("1 1|2".parse::<Partition>().is_err());
        assert!("1|3".parse::<Partition>().is_err());
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203, 877, 4140];
        for (i, &b) in bell.iter().enumerate() {
            let all = enumerate_partitions(i + 1).unwrap();
            assert_eq!(all.len(), b);
            let set: BTreeSet<_> = all.iter().collect();
            assert_eq!(set.len(), b);
        }
        assert!(enumerate_partitions(13).is_err());
    }

    #[test]
    fn restricted_class_is_min_of_second_block_minus_one() {
        assert_eq!(p("1|2 3").restricted_class(), Some(1));
        assert_eq!(p("1 2|3").restricted_class(), Some(2));
        assert_eq!(p("1 3|2").restricted_class(), Some(1));
        assert_eq!(p("1 2 3").restricted_class(), None);
    }

    #[test]
    fn hierarchy_examples() {
        let h2 = Hierarchy::new(2, vec![vec![1], vec![2], vec![1, 2]]).unwrap();
        let r = h2.restrict(1).unwrap();
        assert_eq!(r.members().len(), 2);
        assert!(r.contains(&[1]) && r.contains(&[]));

        let t3 = Hierarchy::new(3, vec![vec![1], vec![2], vec![3], vec![1, 3], vec![1, 2, 3]]).unwrap();
        let expect = Hierarchy::new(2, vec![vec![1], vec![2], vec![1, 2]]).unwrap();
        assert_eq!(t3.restrict(2).unwrap(), expect);
        assert_eq!(t3.restrict(3).unwrap(), t3);

        assert_eq!(h2.children_of(&[1, 2]).unwrap(), vec![vec![1], vec![2]]);
        assert_eq!(t3.children_of(&[1, 2, 3]).unwrap(), vec![vec![1, 3], vec![2]]);
        let star = Hierarchy::new(3, vec![vec![1], vec![2], vec![3], vec![1, 2, 3]]).unwrap();
        assert_eq!(
            star.children_of(&[1, 2, 3]).unwrap(),
            vec![vec![1], vec![2], vec![3]]
        );
        assert!(star.children_of(&[1]).is_err());
        assert!(star.children_of(&[1, 2]).is_err());
    }

    #[test]
    fn hierarchy_rejects_overlap() {
        assert!(Hierarchy::new(3, vec![vec![1, 2], vec![2, 3], vec![1, 2, 3], vec![1], vec![2], vec![3]]).is_err());
        assert!(Hierarchy::new(2, vec![vec![1], vec![1, 2]]).is_err());
    }

    #[test]
    fn mass_partition_validation() {
        let s = MassPartition::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(s.atoms(), &[0.5, 0.3, 0.2]);
        assert_eq!(s.dust(), 0.0);
        assert!(MassPartition::new(vec![0.7, 0.7]).is_err());
        assert!(MassPartition::new(vec![-0.1]).is_err());
        assert!((MassPartition::new(vec![0.25]).unwrap().dust() - 0.75).abs() < 1e-15);
        assert!(MassPartition::new(vec![1.0]).unwrap().is_degenerate());
    }

    #[test]
    fn classify_uniform_and_partial() {
        let uni = FiniteMeasureOnPartitions::from_fn(3, |_| 1.0).unwrap();
        let f = classify_exchangeability(&uni).unwrap();
        assert!(f.exchangeable && f.partially_exchangeable && f.restricted_exchangeable);

        // Equal on least-element size vectors but not on multisets.
        let mu = FiniteMeasureOnPartitions::from_fn(4, |q| {
            let v = q.block_sizes();
            v.iter().enumerate().map(|(i, s)| (i + 1) as f64 * *s as f64).sum()
        })
        .unwrap();
        let a = p("1 2|3 4");
        let b = p("1 3|2 4");
        assert_eq!(mu.weight(&a), mu.weight(&b));
        let f = classify_exchangeability(&mu).unwrap();
        assert!(f.partially_exchangeable);
        assert!(!f.exchangeable);
    }

    #[test]
    fn classify_requires_full_support() {
        let mut w = BTreeMap::new();
        w.insert(p("1 2"), 1.0);
        let mu = FiniteMeasureOnPartitions::new(2, w).unwrap();
        assert!(classify_exchangeability(&mu).is_err());
    }
}
