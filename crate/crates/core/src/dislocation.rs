//! Finitely supported restricted exchangeable dislocation measures, the
//! splitting rules and rates they induce, and closed-form split laws of the
//! alpha-gamma and skewed Poisson-Dirichlet families.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    classify_exchangeability, enumerate_partitions, FiniteMeasureOnPartitions, MassPartition,
    Partition, WEIGHT_TOL,
};
use crate::error::{Error, Result};
use crate::paintbox::kingman_cylinder_prob;

/// Largest `n` accepted by the alpha-gamma history enumeration.
pub const ORACLE_MAX_N: usize = 7;

/// A weighted atom of one of the measures `ν_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuAtom {
    pub s: MassPartition,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DislocationSpec {
    m_cap: usize,
    nu_atoms: Vec<Vec<NuAtom>>,
    #[serde(default)]
    c: Vec<f64>,
    #[serde(default)]
    k: Vec<f64>,
    #[serde(default)]
    conservative_mode: bool,
}

/// A restricted exchangeable dislocation measure
/// `κ = c₁δ_{ε(1)} + Σ_j (c_j δ_{ε(j+1)} + k_j δ_{ω[j]} + ∫ κ_s(· ∩ P^j) ν_j(ds))`
/// with finitely many atoms per `ν_j` and `ν_j = ν_{m_cap}` for `j ≥ m_cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DislocationSpec", into = "DislocationSpec")]
pub struct DiscreteDislocation {
    m_cap: usize,
    nu_atoms: Vec<Vec<NuAtom>>,
    c: Vec<f64>,
    k: Vec<f64>,
    conservative_mode: bool,
}

impl TryFrom<DislocationSpec> for DiscreteDislocation {
    type Error = Error;
    fn try_from(s: DislocationSpec) -> Result<Self> {
        DiscreteDislocation::new(s.m_cap, s.nu_atoms, s.c, s.k, s.conservative_mode)
    }
}

impl From<DiscreteDislocation> for DislocationSpec {
    fn from(d: DiscreteDislocation) -> Self {
        DislocationSpec {
            m_cap: d.m_cap,
            nu_atoms: d.nu_atoms,
            c: d.c,
            k: d.k,
            conservative_mode: d.conservative_mode,
        }
    }
}

impl DiscreteDislocation {
    /// `nu_atoms[j-1]` lists the atoms of `ν_j`; missing levels are empty.
    /// `c[j-1]` and `k[j-1]` hold `c_j` and `k_j`; missing entries are zero.
    pub fn new(
        m_cap: usize,
        mut nu_atoms: Vec<Vec<NuAtom>>,
        c: Vec<f64>,
        k: Vec<f64>,
        conservative_mode: bool,
    ) -> Result<Self> {
        if m_cap == 0 {
            return Err(Error::arg("m_cap must be positive"));
        }
        if nu_atoms.len() > m_cap {
            return Err(Error::arg(format!(
                "{} atom levels given for m_cap = {m_cap}",
                nu_atoms.len()
            )));
        }
        nu_atoms.resize(m_cap, Vec::new());
        for (j, level) in nu_atoms.iter().enumerate() {
            for a in level {
                if !(a.weight.is_finite() && a.weight > 0.0) {
                    return Err(Error::arg(format!("atom weight {} at level {}", a.weight, j + 1)));
                }
                if a.s.is_degenerate() {
                    return Err(Error::arg(format!(
                        "level {} carries an excluded atom {:?}",
                        j + 1,
                        a.s.atoms()
                    )));
                }
                if conservative_mode && !a.s.is_conservative() {
                    return Err(Error::arg("conservative atoms required in conservative mode"));
                }
            }
        }
        for x in c.iter().chain(&k) {
            if !(x.is_finite() && *x >= 0.0) {
                return Err(Error::arg("c_j and k_j must be finite and non-negative"));
            }
            if conservative_mode && *x != 0.0 {
                return Err(Error::arg("c_j = k_j = 0 required in conservative mode"));
            }
        }
        let d = DiscreteDislocation {
            m_cap,
            nu_atoms,
            c,
            k,
            conservative_mode,
        };
        let integral = d.integrability();
        if !integral.is_finite() {
            return Err(Error::arg("integrability functional is not finite"));
        }
        Ok(d)
    }

    /// A conservative model without `c`/`k` atoms.
    pub fn conservative(m_cap: usize, nu_atoms: Vec<Vec<NuAtom>>) -> Result<Self> {
        Self::new(m_cap, nu_atoms, Vec::new(), Vec::new(), true)
    }

    /// The model with a single atom `s = (1/2, 1/2)` of weight 1 in `ν₁` and
    /// `ν_j = 0` for `j ≥ 2`.
    pub fn single_atom() -> Self {
        let s = MassPartition::new(vec![0.5, 0.5]).expect("valid");
        Self::conservative(2, vec![vec![NuAtom { s, weight: 1.0 }], Vec::new()]).expect("valid")
    }

    pub fn m_cap(&self) -> usize {
        self.m_cap
    }

    pub fn conservative_mode(&self) -> bool {
        self.conservative_mode
    }

    /// Atoms of `ν_j`, with `j ≥ m_cap` mapped to level `m_cap`.
    pub fn level(&self, j: usize) -> &[NuAtom] {
        &self.nu_atoms[j.clamp(1, self.m_cap) - 1]
    }

    pub fn c(&self, j: usize) -> f64 {
        self.c.get(j.wrapping_sub(1)).copied().unwrap_or(0.0)
    }

    pub fn k(&self, j: usize) -> f64 {
        self.k.get(j.wrapping_sub(1)).copied().unwrap_or(0.0)
    }

    /// Every distinct atom appearing at some level.
    pub fn distinct_atoms(&self) -> Vec<MassPartition> {
        let mut out: Vec<MassPartition> = Vec::new();
        for a in self.nu_atoms.iter().flatten() {
            if !out.iter().any(|s| s.approx_eq(&a.s)) {
                out.push(a.s.clone());
            }
        }
        out
    }

    /// `Σ_j ∫ (s₀ 1{j=1} + Σ_i s_i^j (1 − s_i)) ν_j(ds)`, with the levels
    /// `j ≥ m_cap` summed in closed form.
    fn integrability(&self) -> f64 {
        let mut total = 0.0;
        for j in 1..=self.m_cap {
            for a in self.level(j) {
                let tail: f64 = if j < self.m_cap {
                    a.s.atoms().iter().map(|s| s.powi(j as i32) * (1.0 - s)).sum()
                } else {
                    a.s.atoms().iter().map(|s| s.powi(j as i32)).sum()
                };
                let dust = if j == 1 { a.s.dust() } else { 0.0 };
                total += a.weight * (tail + dust);
            }
        }
        total
    }
}

/// Total mass the mixture `ν(ds) = Σ_j (Σ_i s_i^j (1 − s_i)) ν_j(ds)` puts on
/// the atom `s`.
pub fn nu_mixture_weight(d: &DiscreteDislocation, atom: &MassPartition) -> Result<f64> {
    let mut found = false;
    let mut total = 0.0;
    for j in 1..=d.m_cap {
        for a in d.level(j).iter().filter(|a| a.s.approx_eq(atom)) {
            found = true;
            let f: f64 = if j < d.m_cap {
                a.s.atoms().iter().map(|s| s.powi(j as i32) * (1.0 - s)).sum()
            } else {
                a.s.atoms().iter().map(|s| s.powi(j as i32)).sum()
            };
            total += a.weight * f;
        }
    }
    if found {
        Ok(total)
    } else {
        Err(Error::arg(format!("atom {:?} does not appear", atom.atoms())))
    }
}

/// Total mass of `ν`.
pub fn nu_total_mass(d: &DiscreteDislocation) -> f64 {
    d.distinct_atoms()
        .iter()
        .map(|s| nu_mixture_weight(d, s).expect("atom present"))
        .sum()
}

fn is_epsilon(p: &Partition, label: usize) -> bool {
    // ε(label) restricted to [n]: {label} split from everything else.
    let n = p.n();
    p.num_blocks() == 2 && label <= n && p.blocks().iter().any(|b| b.len() == 1 && b[0] == label)
}

fn is_omega(p: &Partition, j: usize) -> bool {
    // ω[j] restricted to [n]: [j] followed by singletons.
    let b = p.blocks();
    j < p.n() && b[0].len() == j && b.len() == p.n() - j + 1 && b[0][j - 1] == j
}

/// `κ(P^p)` for a non-trivial `p ∈ P_n`.
pub fn kappa_cylinder(d: &DiscreteDislocation, p: &Partition) -> Result<f64> {
    let j = p
        .restricted_class()
        .ok_or_else(|| Error::arg("kappa is not evaluated on the trivial partition"))?;
    let n = p.n();
    let mut total: f64 = d
        .level(j)
        .iter()
        .map(|a| a.weight * kingman_cylinder_prob(&a.s, p))
        .sum();
    if is_epsilon(p, 1) {
        total += d.c(1);
    }
    for i in 1..n {
        if is_epsilon(p, i + 1) {
            total += d.c(i);
        }
        if is_omega(p, i) {
            total += d.k(i);
        }
    }
    Ok(total)
}

/// `λ_n = κ(P ∖ P^{1_[n]})` by summing the cylinder masses of `P_n`.
pub fn rate(d: &DiscreteDislocation, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::arg("rates are defined for n >= 2"));
    }
    let mut total = 0.0;
    for p in enumerate_partitions(n)? {
        if !p.is_trivial() {
            total += kappa_cylinder(d, &p)?;
        }
    }
    Ok(total)
}

/// `λ_n` from the class masses `κ_s(P^j) = Σ_i s_i^j (1 − s_i) + s₀ 1{j=1}`;
/// no enumeration, so any `n ≥ 2` is accepted.
pub fn rate_closed_form(d: &DiscreteDislocation, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::arg("rates are defined for n >= 2"));
    }
    let mut total = d.c(1);
    for j in 1..n {
        total += d.c(j) + d.k(j);
        if j < d.m_cap {
            total += class_mass(d.level(j), j);
        }
    }
    if n > d.m_cap {
        // Levels m_cap..n-1 share ν_{m_cap}: Σ_j s^j(1−s) = s^m − s^n.
        let m = d.m_cap as i32;
        for a in d.level(d.m_cap) {
            let tail: f64 = a
                .s
                .atoms()
                .iter()
                .map(|s| s.powi(m) - s.powi(n as i32))
                .sum();
            let dust = if d.m_cap == 1 { a.s.dust() } else { 0.0 };
            total += a.weight * (tail + dust);
        }
    }
    Ok(total)
}

fn class_mass(atoms: &[NuAtom], j: usize) -> f64 {
    atoms
        .iter()
        .map(|a| {
            let f: f64 = a.s.atoms().iter().map(|s| s.powi(j as i32) * (1.0 - s)).sum();
            a.weight * (f + if j == 1 { a.s.dust() } else { 0.0 })
        })
        .sum()
}

/// The law `P_n` of the root split on `P_n ∖ {1_[n]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingRuleTable {
    n: usize,
    probs: BTreeMap<Partition, f64>,
}

impl SplittingRuleTable {
    /// Validates that the probabilities are non-negative, miss the trivial
    /// partition and sum to one.
    pub fn new(n: usize, probs: BTreeMap<Partition, f64>) -> Result<Self> {
        let t = Self::new_unchecked(n, probs)?;
        let total: f64 = t.probs.values().sum();
        let tol = WEIGHT_TOL.max(t.probs.len() as f64 * f64::EPSILON);
        if (total - 1.0).abs() > tol {
            return Err(Error::arg(format!("split probabilities sum to {total}")));
        }
        Ok(t)
    }

    /// Checks shape only; the probabilities may be arbitrary non-negative
    /// numbers. Used to build perturbed tables.
    pub fn new_unchecked(n: usize, probs: BTreeMap<Partition, f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg("splitting rules need n >= 2"));
        }
        for (p, &v) in &probs {
            if p.n() != n {
                return Err(Error::arg(format!("{p} is not a partition of [{n}]")));
            }
            if p.is_trivial() {
                return Err(Error::arg("the trivial partition carries no split mass"));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(format!("probability {v} at {p}")));
            }
        }
        Ok(SplittingRuleTable { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &BTreeMap<Partition, f64> {
        &self.probs
    }

    pub fn prob(&self, p: &Partition) -> f64 {
        self.probs.get(p).copied().unwrap_or(0.0)
    }

    pub fn probs_mut(&mut self) -> &mut BTreeMap<Partition, f64> {
        &mut self.probs
    }

    /// The table as a measure on all of `P_n` (zero at `1_[n]`).
    pub fn to_measure(&self) -> Result<FiniteMeasureOnPartitions> {
        FiniteMeasureOnPartitions::from_fn(self.n, |p| self.prob(p))
    }

    /// CSV with columns `partition,probability`, rows in canonical order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("partition,probability\n");
        for (p, v) in &self.probs {
            let _ = writeln!(out, "{p},{v}");
        }
        out
    }

    /// Probabilities aggregated by non-increasing block sizes.
    pub fn ranked_sizes(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        for (p, v) in &self.probs {
            *out.entry(p.block_size_multiset()).or_insert(0.0) += v;
        }
        out
    }
}

/// `P_n(π) = κ(P^π)/λ_n`.
pub fn splitting_rule(d: &DiscreteDislocation, n: usize) -> Result<SplittingRuleTable> {
    if n < 2 {
        return Err(Error::arg("splitting rules need n >= 2"));
    }
    let mut probs = BTreeMap::new();
    let mut total = 0.0;
    for p in enumerate_partitions(n)? {
        if p.is_trivial() {
            continue;
        }
        let v = kappa_cylinder(d, &p)?;
        total += v;
        probs.insert(p, v);
    }
    if total <= 0.0 {
        return Err(Error::Model(format!("rate lambda_{n} is zero")));
    }
    for v in probs.values_mut() {
        *v /= total;
    }
    SplittingRuleTable::new(n, probs)
}

type EppfKey = (usize, Vec<usize>);

/// Collapses a restricted exchangeable table to `(class, size multiset)`.
fn eppf(t: &SplittingRuleTable) -> Result<HashMap<EppfKey, f64>> {
    let flags = classify_exchangeability(&t.to_measure()?)?;
    if !flags.restricted_exchangeable {
        return Err(Error::arg(format!(
            "table at n = {} is not restricted exchangeable",
            t.n
        )));
    }
    Ok(t.probs
        .iter()
        .map(|(p, &v)| {
            (
                (p.restricted_class().expect("non-trivial"), p.block_size_multiset()),
                v,
            )
        })
        .collect())
}

fn eppf_at(e: &HashMap<EppfKey, f64>, class: usize, sizes: &[usize]) -> f64 {
    let mut s = sizes.to_vec();
    s.sort_unstable_by(|a, b| b.cmp(a));
    e.get(&(class, s)).copied().unwrap_or(0.0)
}

/// Largest residual of the EPPF consistency recursion
/// `p_n^j(n₁..n_k) = p_{n+1}^n(n,1) p_n^j(n₁..n_k) + Σ_{i=1}^{k+1} p_{n+1}^j(.., n_i + 1, ..)`
/// between tables at `n` and `n + 1`.
pub fn consistency_residual_tables(t_n: &SplittingRuleTable, t_next: &SplittingRuleTable) -> Result<f64> {
    let n = t_n.n;
    if t_next.n != n + 1 {
        return Err(Error::arg("tables must be at consecutive sizes"));
    }
    let e_n = eppf(t_n)?;
    let e_next = eppf(t_next)?;
    let stay = eppf_at(&e_next, n, &[n, 1]);
    let mut worst: f64 = 0.0;
    for p in t_n.probs.keys() {
        let j = p.restricted_class().expect("non-trivial");
        let sizes = p.block_sizes();
        let lhs = eppf_at(&e_n, j, &sizes);
        let mut rhs = stay * lhs;
        for i in 0..=sizes.len() {
            let mut grown = sizes.clone();
            if i == sizes.len() {
                grown.push(1);
            } else {
                grown[i] += 1;
            }
            rhs += eppf_at(&e_next, j, &grown);
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

pub fn consistency_residual(d: &DiscreteDislocation, n: usize) -> Result<f64> {
    consistency_residual_tables(&splitting_rule(d, n)?, &splitting_rule(d, n + 1)?)
}

/// Random conservative-mode model with `m_cap ≤ 3` and up to three atoms per
/// level, each with up to four masses.
pub fn random_dislocation<R: Rng + ?Sized>(rng: &mut R) -> DiscreteDislocation {
    loop {
        let m_cap = rng.random_range(1..=3);
        let levels: Vec<Vec<NuAtom>> = (0..m_cap)
            .map(|_| {
                (0..rng.random_range(0..=3))
                    .map(|_| NuAtom {
                        s: random_conservative(rng),
                        weight: rng.random_range(0.1..2.0),
                    })
                    .collect()
            })
            .collect();
        if let Ok(d) = DiscreteDislocation::conservative(m_cap, levels) {
            if rate_closed_form(&d, 2).map(|r| r > 0.0).unwrap_or(false) {
                return d;
            }
        }
    }
}

fn random_conservative<R: Rng + ?Sized>(rng: &mut R) -> MassPartition {
    let len = rng.random_range(2..=4);
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut atoms: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // Absorb the rounding error so the dust is exactly zero.
    let rest: f64 = atoms[1..].iter().sum();
    atoms[0] = 1.0 - rest;
    MassPartition::new(atoms).expect("valid")
}

/// Validates `0 ≤ γ ≤ α ≤ 1`.
pub fn check_alphagamma(alpha: f64, gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=alpha).contains(&gamma) {
        return Err(Error::arg(format!(
            "need 0 <= gamma <= alpha <= 1, got alpha = {alpha}, gamma = {gamma}"
        )));
    }
    Ok(())
}

/// A tree on at most 16 leaves as sorted bitmasks of its vertices.
type MaskTree = Vec<u16>;

fn mask_children(t: &MaskTree, b: u16) -> usize {
    t.iter()
        .filter(|&&a| a != b && a & b == a && !t.iter().any(|&c| c != a && c != b && c & a == a && b & c == c))
        .count()
}

fn insert(t: &MaskTree, b: u16, new_leaf: u16, keep_b: bool) -> MaskTree {
    let mut out: MaskTree = t
        .iter()
        .map(|&a| if a & b == b { a | new_leaf } else { a })
        .collect();
    if keep_b {
        out.push(b);
    }
    out.push(new_leaf);
    out.sort_unstable();
    out.dedup();
    out
}

/// Exact law of alpha-gamma trees on `[n]`, `2 ≤ n ≤ 7`, computed by running
/// every insertion history and merging equal trees. Trees are returned as
/// their vertex sets.
pub fn alphagamma_tree_law(alpha: f64, gamma: f64, n: usize) -> Result<BTreeMap<Vec<Vec<usize>>, f64>> {
    check_alphagamma(alpha, gamma)?;
    if !(2..=ORACLE_MAX_N).contains(&n) {
        return Err(Error::Resource(format!(
            "history enumeration supports 2 <= n <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    let mut law: HashMap<MaskTree, f64> = HashMap::new();
    law.insert(vec![0b01, 0b10, 0b11], 1.0);
    for m in 2..n {
        let leaf = 1u16 << m;
        let denom = m as f64 - alpha;
        let mut next: HashMap<MaskTree, f64> = HashMap::new();
        for (t, &pt) in &law {
            let mut total = 0.0;
            for &b in t {
                let edge_w = if b.count_ones() == 1 { 1.0 - alpha } else { gamma };
                if edge_w > 0.0 {
                    *next.entry(insert(t, b, leaf, true)).or_insert(0.0) += pt * edge_w / denom;
                }
                total += edge_w;
                if b.count_ones() >= 2 {
                    let k = mask_children(t, b) as f64;
                    let vw = (k - 1.0) * alpha - gamma;
                    if vw < -1e-12 {
                        return Err(Error::Internal(format!("negative vertex weight {vw}")));
                    }
                    if vw > 0.0 {
                        *next.entry(insert(t, b, leaf, false)).or_insert(0.0) += pt * vw / denom;
                    }
                    total += vw;
                }
            }
            if (total - denom).abs() > 1e-9 {
                return Err(Error::Internal(format!("weights sum to {total}, not {denom}")));
            }
        }
        law = next;
    }
    Ok(law
        .into_iter()
        .map(|(t, p)| {
            let sets = t
                .iter()
                .map(|&m| (0..16).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
                .collect();
            (sets, p)
        })
        .collect())
}

/// Exact root-split law of alpha-gamma trees from [`alphagamma_tree_law`].
pub fn alphagamma_growth_split_oracle(alpha: f64, gamma: f64, n: usize) -> Result<SplittingRuleTable> {
    let law = alphagamma_tree_law(alpha, gamma, n)?;
    let mut probs: BTreeMap<Partition, f64> = enumerate_partitions(n)?
        .into_iter()
        .filter(|p| !p.is_trivial())
        .map(|p| (p, 0.0))
        .collect();
    for (sets, p) in law {
        let full: Vec<usize> = (1..=n).collect();
        let top: Vec<Vec<usize>> = sets
            .iter()
            .filter(|a| a.len() < n && !sets.iter().any(|c| c.len() > a.len() && c != &full && is_sub(a, c)))
            .cloned()
            .collect();
        *probs.entry(Partition::new(n, top)?).or_insert(0.0) += p;
    }
    SplittingRuleTable::new(n, probs)
}

fn is_sub(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// The closed-form root-split EPPF of the alpha-gamma model, class 1 for
/// partitions separating 1 and 2 and class 2 otherwise.
///
/// Gamma ratios are expanded into finite products so that `γ = α` and
/// `α = 0` need no special casing.
pub fn alphagamma_eppf(alpha: f64, gamma: f64, sizes: &[usize], class: usize) -> Result<f64> {
    check_alphagamma(alpha, gamma)?;
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::arg("need at least two positive block sizes"));
    }
    let prefactor = match class {
        1 => 1.0 - alpha,
        2 => gamma,
        _ => return Err(Error::arg(format!("class must be 1 or 2, got {class}"))),
    };
    let k = sizes.len();
    let n: usize = sizes.iter().sum();
    // α^{k−2} Γ(k−1−γ/α)/Γ(1−γ/α) = Π_{i=1}^{k−2} (iα − γ)
    let vertex: f64 = (1..k.saturating_sub(1)).map(|i| i as f64 * alpha - gamma).product();
    // Γ(n_i − α)/Γ(1 − α) = Π_{j=1}^{n_i−1} (j − α)
    let blocks: f64 = sizes
        .iter()
        .map(|&ni| (1..ni).map(|j| j as f64 - alpha).product::<f64>())
        .product();
    // Γ(2 − α)/Γ(n + 1 − α) = 1 / Π_{j=2}^{n} (j − α)
    let norm: f64 = (2..=n).map(|j| j as f64 - alpha).product();
    Ok(prefactor * vertex * blocks / norm)
}

/// One row of the formula-versus-enumeration comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EppfAuditRow {
    pub partition: Partition,
    pub formula: f64,
    pub oracle: f64,
    pub ratio: f64,
}

/// Compares [`alphagamma_eppf`] with the enumerated root-split law at size
/// `n`; partitions outside the two classes of the formula are skipped.
pub fn alphagamma_eppf_audit(alpha: f64, gamma: f64, n: usize) -> Result<Vec<EppfAuditRow>> {
    let table = alphagamma_growth_split_oracle(alpha, gamma, n)?;
    let mut rows = Vec::new();
    for p in enumerate_partitions(n)? {
        let class = match p.restricted_class() {
            Some(1) => 1,
            Some(_) => 2,
            None => continue,
        };
        let formula = alphagamma_eppf(alpha, gamma, &p.block_size_multiset(), class)?;
        let oracle = table.prob(&p);
        let ratio = if oracle > 0.0 { formula / oracle } else { f64::NAN };
        rows.push(EppfAuditRow {
            partition: p,
            formula,
            oracle,
            ratio,
        });
    }
    Ok(rows)
}

fn check_skewed(alpha: f64, theta: f64, lambda: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) || theta < -2.0 * alpha || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::arg(format!(
            "need 0 < alpha < 1, theta >= -2 alpha, 0 <= lambda <= 1; got ({alpha}, {theta}, {lambda})"
        )));
    }
    Ok(())
}

/// Law of the ranked root block sizes of the skewed Poisson-Dirichlet model
/// for `n ∈ {2, 3, 4}`.
pub fn skewed_pd_ranked_split(alpha: f64, theta: f64, lambda: f64, n: usize) -> Result<BTreeMap<Vec<usize>, f64>> {
    check_skewed(alpha, theta, lambda)?;
    let raw: Vec<(Vec<usize>, f64)> = match n {
        2 => vec![(vec![1, 1], 1.0)],
        3 => vec![
            (vec![1, 1, 1], lambda * (2.0 * alpha + theta)),
            (vec![2, 1], (1.0 + lambda) * (1.0 - alpha)),
        ],
        4 => vec![
            (vec![1, 1, 1, 1], lambda * (3.0 * alpha + theta) * (2.0 * alpha + theta)),
            (vec![2, 1, 1], (1.0 + 4.0 * lambda) * (2.0 * alpha + theta) * (1.0 - alpha)),
            (vec![2, 2], (1.0 + lambda) * (1.0 - alpha).powi(2)),
            (vec![3, 1], 2.0 * (1.0 - alpha) * (2.0 - alpha)),
        ],
        _ => return Err(Error::arg(format!("n must be 2, 3 or 4, got {n}"))),
    };
    let total: f64 = raw.iter().map(|(_, v)| v).sum();
    Ok(raw.into_iter().map(|(k, v)| (k, v / total)).collect())
}

/// `|P(S₃=111) − P(S₄=1111) − ½P(S₄=211) − ¼P(S₄=31)P(S₃=111)|`.
pub fn sampling_consistency_residual(alpha: f64, theta: f64, lambda: f64) -> Result<f64> {
    let s3 = skewed_pd_ranked_split(alpha, theta, lambda, 3)?;
    let s4 = skewed_pd_ranked_split(alpha, theta, lambda, 4)?;
    let p3 = s3[&vec![1, 1, 1]];
    let rhs = s4[&vec![1, 1, 1, 1]] + 0.5 * s4[&vec![2, 1, 1]] + 0.25 * s4[&vec![3, 1]] * p3;
    Ok((p3 - rhs).abs())
}

/// Where a sweep point sits relative to the two consistency curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `λ = 1/2`.
    Half,
    /// `λ = (1 − α)/(1 − θ − 2α)`.
    AlphaGamma,
    /// Farther than the margin from both curves.
    Off,
    /// Within the margin of a curve but not on it; not asserted.
    Near,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub theta: f64,
    pub lambda: f64,
    pub kind: CurveKind,
    pub residual: f64,
}

fn linspace(a: f64, b: f64, k: usize) -> impl Iterator<Item = f64> {
    (0..k).map(move |i| if k == 1 { a } else { a + (b - a) * i as f64 / (k - 1) as f64 })
}

/// Sampling-consistency residuals on a `grid³` lattice with
/// `α ∈ [0.05, 0.95]`, `θ ∈ [−2α + 0.05, 0]`, `λ ∈ [0, 1]`, plus the two
/// curves evaluated exactly at every `(α, θ)`.
pub fn sampling_consistency_sweep(grid: usize, margin: f64) -> Result<Vec<SweepPoint>> {
    if grid < 2 {
        return Err(Error::arg("grid needs at least 2 points per axis"));
    }
    let mut out = Vec::new();
    for alpha in linspace(0.05, 0.95, grid) {
        for theta in linspace(-2.0 * alpha + 0.05, 0.0, grid) {
            let lag = (1.0 - alpha) / (1.0 - theta - 2.0 * alpha);
            let mut push = |lambda: f64, kind| -> Result<()> {
                out.push(SweepPoint {
                    alpha,
                    theta,
                    lambda,
                    kind,
                    residual: sampling_consistency_residual(alpha, theta, lambda)?,
                });
                Ok(())
            };
            push(0.5, CurveKind::Half)?;
            if (0.0..=1.0).contains(&lag) {
                push(lag, CurveKind::AlphaGamma)?;
            }
            for lambda in linspace(0.0, 1.0, grid) {
                let near = (lambda - 0.5).abs() <= margin || (lambda - lag).abs() <= margin;
                push(lambda, if near { CurveKind::Near } else { CurveKind::Off })?;
            }
        }
    }
    Ok(out)
}
