//! Rooted Gromov-Hausdorff distances between small metric trees and the
//! scaling experiments built on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::dislocation::{nu_total_mass, DiscreteDislocation};
use crate::error::{Error, Result};
use crate::growth::{
    reduced_tree, sample_markov_branching, sample_reduced_markov_branching, AlphaGammaGrower, DislocationSplitter, GrownTree,
    MetricTree,
};
use crate::harness::rng::par_replicates;
use crate::harness::stats::{mean_stderr, median};

/// Largest number of leaves accepted by [`gh_distance_rooted`].
pub const EXACT_GH_MAX_LEAVES: usize = 10;

/// Tolerance of the four-point check.
pub const FOUR_POINT_TOL: f64 = 1e-9;

/// Pairwise distances between the vertices of a metric tree; index 0 is
/// the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub d: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn from_tree(t: &MetricTree) -> Self {
        let len = t.num_vertices();
        let h = t.heights();
        let mut depth = vec![0usize; len];
        for v in 1..len {
            depth[v] = depth[t.parent(v).expect("non-root")] + 1;
        }
        let mut d = vec![vec![0.0; len]; len];
        for a in 0..len {
            for b in a + 1..len {
                let (mut x, mut y) = (a, b);
                while x != y {
                    if depth[x] >= depth[y] {
                        x = t.parent(x).expect("non-root");
                    } else {
                        y = t.parent(y).expect("non-root");
                    }
                }
                let dist = h[a] + h[b] - 2.0 * h[x];
                d[a][b] = dist;
                d[b][a] = dist;
            }
        }
        let labels = (0..len)
            .map(|v| match (v, t.leaf_label(v)) {
                (0, _) => "root".to_string(),
                (_, Some(l)) => l.to_string(),
                _ => format!("v{v}"),
            })
            .collect();
        DistanceMatrix { labels, d }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Largest violation of the four-point condition.
    pub fn four_point_violation(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        let d = &self.d;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        let mut s = [d[a][b] + d[c][e], d[a][c] + d[b][e], d[a][e] + d[b][c]];
                        s.sort_by(|x, y| x.total_cmp(y));
                        worst = worst.max(s[2] - s[1]);
                    }
                }
            }
        }
        worst
    }

    pub fn satisfies_four_point(&self) -> bool {
        self.four_point_violation() <= FOUR_POINT_TOL
    }
}

/// Distortion of a relation given as index pairs.
fn distortion(a: &DistanceMatrix, b: &DistanceMatrix, pairs: &[(usize, usize)]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[i + 1..] {
            worst = worst.max((a.d[x][x2] - b.d[y][y2]).abs());
        }
    }
    worst
}

/// Searches for a correspondence containing the root pair whose distortion
/// is at most `eta`.
fn correspondence_exists(a: &DistanceMatrix, b: &DistanceMatrix, eta: f64) -> bool {
    let (na, nb) = (a.len(), b.len());
    let ok = |p: (usize, usize), q: (usize, usize)| (a.d[p.0][q.0] - b.d[p.1][q.1]).abs() <= eta;
    let all: Vec<(usize, usize)> = (0..na).flat_map(|x| (0..nb).map(move |y| (x, y))).collect();
    let root = (0, 0);
    let candidates: Vec<(usize, usize)> = all.into_iter().filter(|&p| p != root && ok(p, root)).collect();
    let mut chosen = vec![root];
    let mut cover_a = vec![0u32; na];
    let mut cover_b = vec![0u32; nb];
    cover_a[0] = 1;
    cover_b[0] = 1;

    fn search(
        cands: &[(usize, usize)],
        chosen: &mut Vec<(usize, usize)>,
        cover_a: &mut [u32],
        cover_b: &mut [u32],
        ok: &dyn Fn((usize, usize), (usize, usize)) -> bool,
    ) -> bool {
        // Most constrained uncovered point first.
        let mut best: Option<(bool, usize, usize)> = None;
        for (side, cover) in [(false, &*cover_a), (true, &*cover_b)] {
            for (x, &c) in cover.iter().enumerate() {
                if c > 0 {
                    continue;
                }
                let options = cands.iter().filter(|p| if side { p.1 == x } else { p.0 == x }).count();
                if best.is_none_or(|b| options < b.2) {
                    best = Some((side, x, options));
                }
            }
        }
        let Some((side, x, options)) = best else { return true };
        if options == 0 {
            return false;
        }
        let branch: Vec<(usize, usize)> = cands.iter().copied().filter(|p| if side { p.1 == x } else { p.0 == x }).collect();
        for p in branch {
            let next: Vec<(usize, usize)> = cands.iter().copied().filter(|&q| q != p && ok(p, q)).collect();
            chosen.push(p);
            cover_a[p.0] += 1;
            cover_b[p.1] += 1;
            if search(&next, chosen, cover_a, cover_b, ok) {
                return true;
            }
            chosen.pop();
            cover_a[p.0] -= 1;
            cover_b[p.1] -= 1;
        }
        false
    }
    search(&candidates, &mut chosen, &mut cover_a, &mut cover_b, &ok)
}

fn check_exact_size(t: &MetricTree) -> Result<()> {
    let leaves = t.leaves().len();
    if leaves > EXACT_GH_MAX_LEAVES {
        return Err(Error::Unsupported(format!(
            "exact distance limited to {EXACT_GH_MAX_LEAVES} leaves, got {leaves}"
        )));
    }
    Ok(())
}

/// Exact rooted Gromov-Hausdorff distance between the vertex sets of two
/// trees: half the smallest distortion of a correspondence pairing the
/// roots.
pub fn gh_distance_rooted(a: &MetricTree, b: &MetricTree) -> Result<f64> {
    check_exact_size(a)?;
    check_exact_size(b)?;
    let (da, db) = (DistanceMatrix::from_tree(a), DistanceMatrix::from_tree(b));
    let mut levels: Vec<f64> = vec![0.0];
    for x in 0..da.len() {
        for x2 in x..da.len() {
            for y in 0..db.len() {
                for y2 in y..db.len() {
                    levels.push((da.d[x][x2] - db.d[y][y2]).abs());
                }
            }
        }
    }
    levels.sort_by(|p, q| p.total_cmp(q));
    levels.dedup();
    // The distortion of any correspondence is one of the levels; the
    // largest level is always feasible.
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if correspondence_exists(&da, &db, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(levels[lo] / 2.0)
}

/// Half the distortion of a correspondence matching vertices by rank of
/// height, roots paired; an upper bound on the rooted distance.
pub fn gh_upper_bound(a: &MetricTree, b: &MetricTree) -> f64 {
    let (da, db) = (DistanceMatrix::from_tree(a), DistanceMatrix::from_tree(b));
    let order = |t: &MetricTree| {
        let h = t.heights();
        let mut idx: Vec<usize> = (1..t.num_vertices()).collect();
        idx.sort_by(|&x, &y| h[x].total_cmp(&h[y]).then(x.cmp(&y)));
        idx
    };
    let (oa, ob) = (order(a), order(b));
    let mut pairs = vec![(0, 0)];
    let rank = |i: usize, from: usize, to: usize| -> usize {
        if from <= 1 {
            0
        } else {
            ((i as f64) * ((to - 1) as f64) / ((from - 1) as f64)).round() as usize
        }
    };
    if !oa.is_empty() && !ob.is_empty() {
        for (i, &x) in oa.iter().enumerate() {
            pairs.push((x, ob[rank(i, oa.len(), ob.len())]));
        }
        for (j, &y) in ob.iter().enumerate() {
            pairs.push((oa[rank(j, ob.len(), oa.len())], y));
        }
    } else {
        for &x in &oa {
            pairs.push((x, 0));
        }
        for &y in &ob {
            pairs.push((0, y));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    distortion(&da, &db, &pairs) / 2.0
}

/// Unlabelled canonical form with lengths rounded to `decimals` places.
pub fn metric_shape_key(t: &MetricTree, decimals: usize) -> String {
    let ch = t.children();
    fn key(t: &MetricTree, ch: &[Vec<usize>], v: usize, dec: usize) -> String {
        let mut ks: Vec<String> = ch[v].iter().map(|&c| key(t, ch, c, dec)).collect();
        ks.sort();
        format!("({}):{:.*}", ks.join(","), dec, t.edge_length(v))
    }
    key(t, &ch, 0, decimals)
}

/// Labelled topology of a metric tree, lengths dropped.
pub fn topology_key(t: &MetricTree) -> String {
    let ch = t.children();
    fn key(t: &MetricTree, ch: &[Vec<usize>], v: usize) -> String {
        match t.leaf_label(v) {
            Some(l) if ch[v].is_empty() => l.to_string(),
            _ => format!("({})", ch[v].iter().map(|&c| key(t, ch, c)).collect::<Vec<_>>().join(",")),
        }
    }
    key(t, &ch, 0)
}

/// Tree families used by the scaling experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TreeModel {
    AlphaGamma { alpha: f64, gamma: f64 },
    /// A finite dislocation model; its index is 0 and the slowly varying
    /// factor is the total mass of `ν`.
    Dislocation { model: DiscreteDislocation },
    /// Deterministic star trees, for calibration.
    Star,
}

impl TreeModel {
    /// `(a, c)` with trees rescaled by `n^a · c · Γ(1 − a)`.
    pub fn scaling(&self) -> (f64, f64) {
        match self {
            TreeModel::AlphaGamma { gamma, .. } => (*gamma, 1.0),
            TreeModel::Dislocation { model } => (0.0, nu_total_mass(model)),
            TreeModel::Star => (0.0, 1.0),
        }
    }

    pub fn normalization(&self, n: usize) -> f64 {
        let (a, c) = self.scaling();
        (n as f64).powf(a) * c * gamma(1.0 - a)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TreeModel::AlphaGamma { alpha, gamma } => crate::dislocation::check_alphagamma(*alpha, *gamma),
            TreeModel::Dislocation { model } => {
                if nu_total_mass(model) > 0.0 || (1..=model.m_cap()).any(|j| model.c(j) > 0.0 || model.k(j) > 0.0) {
                    Ok(())
                } else {
                    Err(Error::arg("dislocation model has no mass"))
                }
            }
            TreeModel::Star => Ok(()),
        }
    }

    /// A full tree with `n` leaves.
    pub fn sample_tree<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<GrownTree> {
        match self {
            TreeModel::AlphaGamma { alpha, gamma } => crate::growth::grow_alphagamma(*alpha, *gamma, n, rng),
            TreeModel::Dislocation { model } => sample_markov_branching(&mut DislocationSplitter::new(model), n, rng),
            TreeModel::Star => GrownTree::star(n),
        }
    }

    /// `R(T_n, [k])` with unit edges.
    pub fn sample_reduced<R: rand::Rng + ?Sized>(&self, n: usize, k: usize, rng: &mut R) -> Result<MetricTree> {
        match self {
            TreeModel::Dislocation { model } => {
                sample_reduced_markov_branching(&mut DislocationSplitter::new(model), n, k, rng)
            }
            _ => {
                let t = self.sample_tree(n, rng)?;
                reduced_tree(&t, &(1..=k).collect::<Vec<_>>())
            }
        }
    }
}

/// One row of the edge-length table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub n: usize,
    /// Labelled topology of `R(T_n, [k])`.
    pub shape: String,
    /// Index of the edge in the canonical vertex order (edge above vertex).
    pub edge: usize,
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Rescaled edge lengths of `R(T_n, [k])` grouped by topology.
pub fn edge_convergence_experiment(model: &TreeModel, k: usize, n_grid: &[usize], reps: u64, seed: u64) -> Result<Vec<EdgeRow>> {
    model.validate()?;
    if k == 0 || n_grid.iter().any(|&n| n < k) {
        return Err(Error::arg("need 1 <= k <= n for every grid point"));
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        let norm = model.normalization(n);
        let samples = par_replicates(seed, &format!("edges-{n}-{k}"), reps, |_, rng| {
            model.sample_reduced(n, k, rng).map(|t| (topology_key(&t), t.scaled(1.0 / norm)))
        });
        let mut groups: BTreeMap<String, Vec<MetricTree>> = BTreeMap::new();
        for s in samples {
            let (key, t) = s?;
            groups.entry(key).or_default().push(t);
        }
        for (shape, trees) in groups {
            for e in 1..trees[0].num_vertices() {
                let xs: Vec<f64> = trees.iter().map(|t| t.edge_length(e)).collect();
                let (mean, stderr) = mean_stderr(&xs);
                rows.push(EdgeRow {
                    n,
                    shape: shape.clone(),
                    edge: e,
                    count: xs.len(),
                    mean,
                    stderr,
                });
            }
        }
    }
    Ok(rows)
}

/// Statistic of `T_n°` used for the exponent fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeStatistic {
    Height,
    MeanDepth,
}

impl std::str::FromStr for TreeStatistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "height" => Ok(TreeStatistic::Height),
            "mean_depth" | "mean-depth" => Ok(TreeStatistic::MeanDepth),
            _ => Err(Error::arg(format!("unknown statistic {s:?}"))),
        }
    }
}

fn statistic_of(depths: &[usize], stat: TreeStatistic) -> f64 {
    match stat {
        TreeStatistic::Height => depths.iter().copied().max().unwrap_or(0) as f64,
        TreeStatistic::MeanDepth => depths.iter().sum::<usize>() as f64 / depths.len().max(1) as f64,
    }
}

/// Leaf depths in `T_n°`, i.e. edges from the added root.
fn sample_depths<R: rand::Rng + ?Sized>(model: &TreeModel, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    match model {
        TreeModel::AlphaGamma { alpha, gamma } => {
            let mut g = AlphaGammaGrower::new(*alpha, *gamma)?;
            g.grow_to(n, rng)?;
            Ok(g.leaf_depths())
        }
        _ => {
            let t = model.sample_tree(n, rng)?;
            let d = t.depths();
            Ok((1..=n).map(|l| d[t.leaf_vertex(l).expect("label")]).collect())
        }
    }
}

/// Mean statistic at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub reps: u64,
}

/// Least-squares slope of `log E[stat]` against `log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: Vec<ScalingPoint>,
}

/// Ordinary least squares `y = a + b x`; returns `(b, stderr(b))`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::arg("slope needs at least 3 points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("grid points must differ"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    Ok((b, (rss / (n - 2.0) / sxx).sqrt()))
}

pub fn scaling_exponent(model: &TreeModel, n_grid: &[usize], reps: u64, stat: TreeStatistic, seed: u64) -> Result<ScalingFit> {
    model.validate()?;
    if n_grid.len() < 3 || n_grid.contains(&0) {
        return Err(Error::arg("scaling fit needs at least 3 positive grid points"));
    }
    let mut points = Vec::new();
    for &n in n_grid {
        let vals = par_replicates(seed, &format!("exponent-{n}"), reps, |_, rng| {
            sample_depths(model, n, rng).map(|d| statistic_of(&d, stat))
        });
        let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
        let (mean, stderr) = mean_stderr(&vals);
        points.push(ScalingPoint { n, mean, stderr, reps });
    }
    let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean.ln()).collect();
    let (slope, stderr) = ols_slope(&x, &y)?;
    Ok(ScalingFit { slope, stderr, points })
}

/// Median rooted distance between rescaled `R(T_n,[k])` and
/// `R(T_{4n},[k])` taken from the same growth run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationPoint {
    pub n: usize,
    pub median: f64,
    pub pairs: u64,
}

/// Growth coupling makes the labelled shapes of the two reduced trees
/// agree, so the pairs are shape-matched.
pub fn gh_stabilization(alpha: f64, gamma_: f64, k: usize, n_grid: &[usize], pairs: u64, seed: u64) -> Result<Vec<StabilizationPoint>> {
    let model = TreeModel::AlphaGamma { alpha, gamma: gamma_ };
    model.validate()?;
    if k == 0 || k > EXACT_GH_MAX_LEAVES || n_grid.iter().any(|&n| n < k) {
        return Err(Error::arg(format!("need 1 <= k <= min(n, {EXACT_GH_MAX_LEAVES})")));
    }
    let labels: Vec<usize> = (1..=k).collect();
    let mut out = Vec::new();
    for &n in n_grid {
        let d = par_replicates(seed, &format!("gh-{n}-{k}"), pairs, |_, rng| -> Result<f64> {
            let mut g = AlphaGammaGrower::new(alpha, gamma_)?;
            g.grow_to(n, rng)?;
            let a = reduced_tree(&g.snapshot(), &labels)?.scaled(1.0 / model.normalization(n));
            g.grow_to(4 * n, rng)?;
            let b = reduced_tree(&g.snapshot(), &labels)?.scaled(1.0 / model.normalization(4 * n));
            gh_distance_rooted(&a, &b)
        });
        let d: Vec<f64> = d.into_iter().collect::<Result<_>>()?;
        out.push(StabilizationPoint {
            n,
            median: median(&d),
            pairs,
        });
    }
    Ok(out)
}

/// Fraction of leaves of `t` within graph distance `radius` of the subtree
/// spanned by the root and the leaves `1..=k`.
pub fn fill_fraction(t: &GrownTree, k: usize, radius: f64) -> Result<f64> {
    if k == 0 || k > t.n() {
        return Err(Error::arg(format!("k = {k} outside [1, {}]", t.n())));
    }
    let len = t.num_vertices();
    let mut in_span = vec![false; len];
    for l in 1..=k {
        let mut v = Some(t.leaf_vertex(l)?);
        while let Some(x) = v {
            if in_span[x] {
                break;
            }
            in_span[x] = true;
            v = t.parent(x);
        }
    }
    let depth = t.depths();
    let mut anchor = vec![0usize; len];
    for v in 0..len {
        anchor[v] = if in_span[v] {
            depth[v]
        } else {
            anchor[t.parent(v).expect("root is spanned")]
        };
    }
    let near = (1..=t.n())
        .filter(|&l| {
            let v = t.leaf_vertex(l).expect("label");
            (depth[v] - anchor[v]) as f64 <= radius
        })
        .count();
    Ok(near as f64 / t.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::grow_alphagamma;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seg(x: f64) -> MetricTree {
        MetricTree::segment(x).unwrap()
    }

    #[test]
    fn segments() {
        assert!((gh_distance_rooted(&seg(1.0), &seg(3.5)).unwrap() - 1.25).abs() < 1e-12);
        assert_eq!(gh_distance_rooted(&seg(2.0), &seg(2.0)).unwrap(), 0.0);
        assert!((gh_upper_bound(&seg(1.0), &seg(3.5)) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn doubling_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = grow_alphagamma(0.5, 0.3, 6, &mut rng).unwrap();
        let r = reduced_tree(&t, &[1, 2, 3, 4, 5, 6]).unwrap();
        let diam = DistanceMatrix::from_tree(&r).d.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        let g = gh_distance_rooted(&r, &r.scaled(2.0)).unwrap();
        assert!(g > 0.0 && g <= diam / 2.0 + 1e-12);
    }

    #[test]
    fn four_point_on_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = grow_alphagamma(0.6, 0.2, 12, &mut rng).unwrap();
        let r = reduced_tree(&t, &(1..=12).collect::<Vec<_>>()).unwrap();
        assert!(DistanceMatrix::from_tree(&r).satisfies_four_point());
    }

    #[test]
    fn exact_regime_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = grow_alphagamma(0.5, 0.3, 11, &mut rng).unwrap();
        let r = reduced_tree(&t, &(1..=11).collect::<Vec<_>>()).unwrap();
        assert!(matches!(gh_distance_rooted(&r, &r), Err(Error::Unsupported(_))));
        assert_eq!(gh_upper_bound(&r, &r), 0.0);
    }

    #[test]
    fn scale_mismatch_bound() {
        assert!(gh_upper_bound(&seg(1.0), &seg(1000.0)) > 100.0);
    }

    #[test]
    fn star_slope_is_zero() {
        let fit = scaling_exponent(&TreeModel::Star, &[8, 16, 32, 64, 128], 3, TreeStatistic::Height, 0).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(scaling_exponent(&TreeModel::Star, &[8, 16], 3, TreeStatistic::Height, 0).is_err());
    }

    #[test]
    fn fill_is_monotone_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = grow_alphagamma(0.5, 0.4, 512, &mut rng).unwrap();
        let f: Vec<f64> = [2, 4, 8, 16].iter().map(|&k| fill_fraction(&t, k, 2.0).unwrap()).collect();
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(fill_fraction(&t, 512, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn edge_table_for_k1() {
        let rows = edge_convergence_experiment(&TreeModel::AlphaGamma { alpha: 0.5, gamma: 0.4 }, 1, &[16, 32], 50, 0).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.count == 50 && r.mean > 0.0));
    }
}
