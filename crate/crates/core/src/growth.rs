//! Labelled trees on `[n]`: sequential alpha-gamma growth, recursive
//! Markov branching sampling, leaf deletion, spines and reduced trees.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{Hierarchy, MassPartition, Partition};
use crate::dislocation::{check_alphagamma, skewed_pd_ranked_split, DiscreteDislocation, SplittingRuleTable};
use crate::error::{Error, Result};

/// A rooted tree whose leaves carry the labels `1..=n`, stored in a
/// canonical form: vertices in depth-first preorder, children ordered by
/// least leaf label, root at index 0.
///
/// Vertex `v` stands for the block of labels below it, so the vertex set is
/// a hierarchy of `[n]` without the empty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrownTree {
    n: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    label: Vec<Option<usize>>,
    leaf_node: Vec<usize>,
}

impl GrownTree {
    /// Builds a tree from an arbitrary parent array; `label[v]` must be set
    /// exactly on the leaves and the labels must be `1..=n`.
    pub fn from_parts(parent: &[Option<usize>], label: &[Option<usize>]) -> Result<Self> {
        let len = parent.len();
        if len == 0 || label.len() != len {
            return Err(Error::arg("parent and label arrays must be non-empty and equal length"));
        }
        let mut children = vec![Vec::new(); len];
        let mut root = None;
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) if *p < len && *p != v => children[*p].push(v),
                Some(_) => return Err(Error::arg(format!("bad parent for vertex {v}"))),
                None if root.is_none() => root = Some(v),
                None => return Err(Error::arg("more than one root")),
            }
        }
        let root = root.ok_or_else(|| Error::arg("no root"))?;
        let n = label.iter().flatten().count();
        let mut seen = vec![false; n + 1];
        for v in 0..len {
            match (label[v], children[v].len()) {
                (Some(l), 0) if (1..=n).contains(&l) && !seen[l] => seen[l] = true,
                (None, k) if k >= 2 => {}
                _ => return Err(Error::arg(format!("vertex {v}: leaves need a fresh label, inner vertices >= 2 children"))),
            }
        }
        // Preorder from the root; reaching every vertex rules out cycles.
        let mut order = Vec::with_capacity(len);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(children[v].iter().copied());
            if order.len() > len {
                return Err(Error::arg("parent array contains a cycle"));
            }
        }
        if order.len() != len {
            return Err(Error::arg("parent array is not connected"));
        }
        let mut min_label = vec![usize::MAX; len];
        for &v in order.iter().rev() {
            min_label[v] = match label[v] {
                Some(l) => l,
                None => children[v].iter().map(|&c| min_label[c]).min().expect("inner"),
            };
        }
        for c in children.iter_mut() {
            c.sort_unstable_by_key(|&x| min_label[x]);
        }
        let mut new_id = vec![0usize; len];
        let mut canon = Vec::with_capacity(len);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            new_id[v] = canon.len();
            canon.push(v);
            stack.extend(children[v].iter().rev().copied());
        }
        let mut t = GrownTree {
            n,
            parent: vec![None; len],
            children: vec![Vec::new(); len],
            label: vec![None; len],
            leaf_node: vec![0; n],
        };
        for (i, &v) in canon.iter().enumerate() {
            t.parent[i] = parent[v].map(|p| new_id[p]);
            t.children[i] = children[v].iter().map(|&c| new_id[c]).collect();
            t.label[i] = label[v];
            if let Some(l) = label[v] {
                t.leaf_node[l - 1] = i;
            }
        }
        Ok(t)
    }

    /// The tree whose vertices are the non-empty members of `h`.
    pub fn from_hierarchy(h: &Hierarchy) -> Result<Self> {
        let members: Vec<&Vec<usize>> = h.members().iter().filter(|m| !m.is_empty()).collect();
        let mut parent = vec![None; members.len()];
        let mut label = vec![None; members.len()];
        for (i, m) in members.iter().enumerate() {
            if m.len() == 1 {
                label[i] = Some(m[0]);
            }
            parent[i] = members
                .iter()
                .enumerate()
                .filter(|(_, c)| c.len() > m.len() && m.iter().all(|x| c.binary_search(x).is_ok()))
                .min_by_key(|(_, c)| c.len())
                .map(|(j, _)| j);
        }
        Self::from_parts(&parent, &label)
    }

    /// The single-leaf tree.
    pub fn leaf() -> Self {
        Self::from_parts(&[None], &[Some(1)]).expect("valid")
    }

    /// The tree with every leaf a child of the root.
    pub fn star(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("a tree needs at least one leaf"));
        }
        if n == 1 {
            return Ok(Self::leaf());
        }
        let mut parent = vec![None];
        let mut label = vec![None];
        for l in 1..=n {
            parent.push(Some(0));
            label.push(Some(l));
        }
        Self::from_parts(&parent, &label)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn label(&self, v: usize) -> Option<usize> {
        self.label[v]
    }

    /// Vertex of the leaf `{label}`.
    pub fn leaf_vertex(&self, label: usize) -> Result<usize> {
        if label == 0 || label > self.n {
            return Err(Error::arg(format!("label {label} outside [1, {}]", self.n)));
        }
        Ok(self.leaf_node[label - 1])
    }

    /// Sorted label block of every vertex.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); self.num_vertices()];
        for v in (0..self.num_vertices()).rev() {
            if let Some(l) = self.label[v] {
                blocks[v] = vec![l];
            } else {
                let mut b: Vec<usize> = self.children[v].iter().flat_map(|&c| blocks[c].iter().copied()).collect();
                b.sort_unstable();
                blocks[v] = b;
            }
        }
        blocks
    }

    pub fn to_hierarchy(&self) -> Hierarchy {
        Hierarchy::new(self.n, self.blocks()).expect("trees are hierarchies")
    }

    /// The partition of `[n]` into the blocks of the root's children.
    pub fn root_split(&self) -> Option<Partition> {
        if self.n < 2 {
            return None;
        }
        let blocks = self.blocks();
        Partition::new(self.n, self.children[0].iter().map(|&c| blocks[c].clone()).collect()).ok()
    }

    /// Number of vertices on the path from the root to `v`, both included.
    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![1usize; self.num_vertices()];
        for v in 1..self.num_vertices() {
            d[v] = d[self.parent[v].expect("non-root")] + 1;
        }
        d
    }

    /// Largest leaf depth.
    pub fn height(&self) -> usize {
        let d = self.depths();
        self.leaf_node.iter().map(|&v| d[v]).max().unwrap_or(0)
    }

    /// Nested-parenthesis form, e.g. `((1,3),2);`.
    pub fn newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(0, &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, v: usize, out: &mut String) {
        if let Some(l) = self.label[v] {
            let _ = write!(out, "{l}");
            return;
        }
        out.push('(');
        for (i, &c) in self.children[v].iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_newick(c, out);
        }
        out.push(')');
    }

    /// Canonical form of the unlabelled tree.
    pub fn shape_key(&self) -> String {
        let mut keys: Vec<String> = vec![String::new(); self.num_vertices()];
        for v in (0..self.num_vertices()).rev() {
            if self.label[v].is_some() {
                keys[v] = "*".to_string();
            } else {
                let mut ks: Vec<String> = self.children[v].iter().map(|&c| std::mem::take(&mut keys[c])).collect();
                ks.sort_unstable();
                keys[v] = format!("({})", ks.join(","));
            }
        }
        std::mem::take(&mut keys[0])
    }

    /// Subtree spanned by the leaves whose labels satisfy `keep`, with
    /// single-child vertices suppressed. Returns the kept vertices in
    /// preorder and, for each, the position of its kept parent.
    fn induced(&self, keep: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<Option<usize>>) {
        let len = self.num_vertices();
        let mut count = vec![0usize; len];
        for v in (0..len).rev() {
            count[v] = match self.label[v] {
                Some(l) => usize::from(keep(l)),
                None => self.children[v].iter().map(|&c| count[c]).sum(),
            };
        }
        let mut kept_anc: Vec<Option<usize>> = vec![None; len];
        let mut position: Vec<usize> = vec![usize::MAX; len];
        let mut kept = Vec::new();
        let mut kept_parent = Vec::new();
        for v in 0..len {
            if count[v] == 0 {
                continue;
            }
            let above = self.parent[v].and_then(|p| kept_anc[p]);
            let is_kept = match self.label[v] {
                Some(_) => true,
                None => self.children[v].iter().filter(|&&c| count[c] > 0).count() >= 2,
            };
            if is_kept {
                position[v] = kept.len();
                kept.push(v);
                kept_parent.push(above.map(|a| position[a]));
                kept_anc[v] = Some(v);
            } else {
                kept_anc[v] = above;
            }
        }
        (kept, kept_parent)
    }

    /// The restriction `T ∩ [m]`.
    pub fn restrict(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n {
            return Err(Error::arg(format!("restriction size {m} outside [1, {}]", self.n)));
        }
        let (kept, kept_parent) = self.induced(|l| l <= m);
        let label: Vec<Option<usize>> = kept.iter().map(|&v| self.label[v]).collect();
        Self::from_parts(&kept_parent, &label)
    }
}

/// A rooted tree with edge lengths; vertex 0 is the root and every other
/// vertex stores the length of the edge to its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTree {
    parent: Vec<Option<usize>>,
    edge_length: Vec<f64>,
    leaf_label: Vec<Option<usize>>,
}

impl MetricTree {
    /// Vertex 0 must be the root and parents must precede their children.
    pub fn new(parent: Vec<Option<usize>>, edge_length: Vec<f64>, leaf_label: Vec<Option<usize>>) -> Result<Self> {
        let len = parent.len();
        if len == 0 || edge_length.len() != len || leaf_label.len() != len {
            return Err(Error::arg("metric tree arrays must be non-empty and of equal length"));
        }
        if parent[0].is_some() {
            return Err(Error::arg("vertex 0 must be the root"));
        }
        for v in 1..len {
            match parent[v] {
                Some(p) if p < v => {}
                _ => return Err(Error::arg(format!("vertex {v} needs a parent with a smaller index"))),
            }
            if !(edge_length[v].is_finite() && edge_length[v] >= 0.0) {
                return Err(Error::arg(format!("edge length {} at vertex {v}", edge_length[v])));
            }
        }
        let mut edge_length = edge_length;
        edge_length[0] = 0.0;
        Ok(MetricTree {
            parent,
            edge_length,
            leaf_label,
        })
    }

    /// A root joined to one leaf labelled 1 by an edge of length `len`.
    pub fn segment(len: f64) -> Result<Self> {
        Self::new(vec![None, Some(0)], vec![0.0, len], vec![None, Some(1)])
    }

    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn edge_length(&self, v: usize) -> f64 {
        self.edge_length[v]
    }

    pub fn leaf_label(&self, v: usize) -> Option<usize> {
        self.leaf_label[v]
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.num_vertices()];
        for v in 1..self.num_vertices() {
            ch[self.parent[v].expect("non-root")].push(v);
        }
        ch
    }

    /// Vertices without children.
    pub fn leaves(&self) -> Vec<usize> {
        let ch = self.children();
        (0..self.num_vertices()).filter(|&v| v > 0 && ch[v].is_empty()).collect()
    }

    /// Distance from the root to every vertex.
    pub fn heights(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.num_vertices()];
        for v in 1..self.num_vertices() {
            h[v] = h[self.parent[v].expect("non-root")] + self.edge_length[v];
        }
        h
    }

    /// Edge lengths of vertices `1..`, i.e. the edge above each vertex.
    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_length[1..]
    }

    pub fn total_length(&self) -> f64 {
        self.edge_length.iter().sum()
    }

    /// Multiplies every length by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut t = self.clone();
        for x in t.edge_length.iter_mut() {
            *x *= c;
        }
        t
    }

    /// Nested form with `:length` suffixes; a root with one child is
    /// written as that child's subtree carrying the root edge.
    pub fn newick(&self) -> String {
        let ch = self.children();
        let mut out = String::new();
        if ch[0].len() == 1 {
            self.write_newick(ch[0][0], &ch, &mut out);
        } else {
            self.write_inner(0, &ch, &mut out);
        }
        out.push(';');
        out
    }

    fn write_inner(&self, v: usize, ch: &[Vec<usize>], out: &mut String) {
        out.push('(');
        for (i, &c) in ch[v].iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_newick(c, ch, out);
        }
        out.push(')');
    }

    fn write_newick(&self, v: usize, ch: &[Vec<usize>], out: &mut String) {
        if ch[v].is_empty() {
            if let Some(l) = self.leaf_label[v] {
                let _ = write!(out, "{l}");
            }
        } else {
            self.write_inner(v, ch, out);
        }
        let _ = write!(out, ":{}", self.edge_length[v]);
    }
}

/// Number of blocks of `t` containing `label`, i.e. the unit-length
/// distance from the added root to the leaf.
pub fn spine_depth(t: &GrownTree, label: usize) -> Result<usize> {
    let v = t.leaf_vertex(label)?;
    Ok(t.depths()[v])
}

/// The subtree spanned by the added root and the leaves `labels`, degree-2
/// vertices suppressed, with each edge as long as the unit edges it
/// replaces.
pub fn reduced_tree(t: &GrownTree, labels: &[usize]) -> Result<MetricTree> {
    if labels.is_empty() {
        return Err(Error::arg("reduced tree needs at least one label"));
    }
    let mut want = vec![false; t.n() + 1];
    for &l in labels {
        t.leaf_vertex(l)?;
        want[l] = true;
    }
    let (kept, kept_parent) = t.induced(|l| want[l]);
    let depth = t.depths();
    let mut parent = vec![None];
    let mut len = vec![0.0];
    let mut lab = vec![None];
    for (i, &v) in kept.iter().enumerate() {
        let (p, d) = match kept_parent[i] {
            Some(p) => (p + 1, depth[v] - depth[kept[p]]),
            None => (0, depth[v]),
        };
        parent.push(Some(p));
        len.push(d as f64);
        lab.push(t.label(v));
    }
    MetricTree::new(parent, len, lab)
}

/// Number of branch points `v` on the path from the root to leaf `j` at
/// which one of the `m` smallest labels below `v` leaves the subtree that
/// contains `j`.
pub fn special_branch_count(t: &GrownTree, j: usize, m: usize) -> Result<usize> {
    let leaf = t.leaf_vertex(j)?;
    if m == 0 {
        return Err(Error::arg("m must be positive"));
    }
    let len = t.num_vertices();
    let mut smallest: Vec<Vec<usize>> = vec![Vec::new(); len];
    for v in (0..len).rev() {
        smallest[v] = match t.label(v) {
            Some(l) => vec![l],
            None => {
                let mut all: Vec<usize> = t.children(v).iter().flat_map(|&c| smallest[c].iter().copied()).collect();
                all.sort_unstable();
                all.truncate(m);
                all
            }
        };
    }
    let mut count = 0;
    let mut child = leaf;
    while let Some(v) = t.parent(child) {
        if smallest[v].iter().any(|l| !smallest[child].contains(l)) {
            count += 1;
        }
        child = v;
    }
    Ok(count)
}

/// Removes a uniformly chosen leaf and shifts the larger labels down by one.
pub fn delete_uniform_leaf<R: Rng + ?Sized>(t: &GrownTree, rng: &mut R) -> Result<GrownTree> {
    if t.n() < 2 {
        return Err(Error::arg("cannot delete the only leaf"));
    }
    let gone = rng.random_range(1..=t.n());
    let (kept, kept_parent) = t.induced(|l| l != gone);
    let label: Vec<Option<usize>> = kept
        .iter()
        .map(|&v| t.label(v).map(|l| if l > gone { l - 1 } else { l }))
        .collect();
    GrownTree::from_parts(&kept_parent, &label)
}

/// Sequential alpha-gamma growth on a mutable arena.
#[derive(Debug, Clone)]
pub struct AlphaGammaGrower {
    alpha: f64,
    gamma: f64,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    label: Vec<Option<usize>>,
    leaves: Vec<usize>,
    internals: Vec<usize>,
    root: usize,
}

impl AlphaGammaGrower {
    /// Starts from the single leaf `T₁`.
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        check_alphagamma(alpha, gamma)?;
        Ok(AlphaGammaGrower {
            alpha,
            gamma,
            parent: vec![None],
            children: vec![Vec::new()],
            label: vec![Some(1)],
            leaves: vec![0],
            internals: Vec::new(),
            root: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.leaves.len()
    }

    fn add_node(&mut self, parent: Option<usize>, label: Option<usize>) -> usize {
        let id = self.parent.len();
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.label.push(label);
        id
    }

    fn insert_edge(&mut self, b: usize) {
        let n = self.n();
        let up = self.parent[b];
        let mid = self.add_node(up, None);
        match up {
            Some(p) => {
                let slot = self.children[p].iter().position(|&c| c == b).expect("child");
                self.children[p][slot] = mid;
            }
            None => self.root = mid,
        }
        self.parent[b] = Some(mid);
        let leaf = self.add_node(Some(mid), Some(n + 1));
        self.children[mid] = vec![b, leaf];
        self.leaves.push(leaf);
        self.internals.push(mid);
    }

    fn insert_vertex(&mut self, b: usize) {
        let n = self.n();
        let leaf = self.add_node(Some(b), Some(n + 1));
        self.children[b].push(leaf);
        self.leaves.push(leaf);
    }

    /// Inserts leaf `n + 1`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let n = self.n();
        if n == 1 {
            self.insert_edge(self.leaves[0]);
            return Ok(());
        }
        let (a, g) = (self.alpha, self.gamma);
        let nf = n as f64;
        let inner = self.internals.len() as f64;
        let leaf_total = nf * (1.0 - a);
        let edge_total = inner * g;
        let vertex_total = a * (nf - 1.0) - g * inner;
        if vertex_total < -1e-9 {
            return Err(Error::Internal(format!("negative vertex weight total {vertex_total}")));
        }
        debug_assert!((leaf_total + edge_total + vertex_total - (nf - a)).abs() < 1e-9);
        let u = rng.random::<f64>() * (nf - a);
        if u < leaf_total || (edge_total <= 0.0 && vertex_total <= 1e-12) {
            let b = self.leaves[rng.random_range(0..self.leaves.len())];
            self.insert_edge(b);
        } else if u < leaf_total + edge_total || vertex_total <= 1e-12 {
            let b = self.internals[rng.random_range(0..self.internals.len())];
            self.insert_edge(b);
        } else {
            // Parent of a uniform non-root vertex is B with probability
            // ∝ k_B; thinning by ((k−1)α−γ)/(kα) leaves weights ∝ (k−1)α−γ.
            loop {
                let v = rng.random_range(0..self.parent.len());
                let Some(b) = self.parent[v] else { continue };
                let k = self.children[b].len() as f64;
                let w = (k - 1.0) * a - g;
                if w < -1e-12 {
                    return Err(Error::Internal(format!("vertex weight {w} < 0")));
                }
                if rng.random::<f64>() * k * a < w {
                    self.insert_vertex(b);
                    break;
                }
            }
        }
        Ok(())
    }

    pub fn grow_to<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<()> {
        while self.n() < n {
            self.step(rng)?;
        }
        Ok(())
    }

    /// The current tree in canonical form.
    pub fn snapshot(&self) -> GrownTree {
        GrownTree::from_parts(&self.parent, &self.label).expect("grower keeps a valid tree")
    }

    /// Leaf depths indexed by label minus one, without building a snapshot.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.parent.len()];
        let mut stack = vec![(self.root, 1usize)];
        let mut out = vec![0usize; self.n()];
        while let Some((v, d)) = stack.pop() {
            depth[v] = d;
            if let Some(l) = self.label[v] {
                out[l - 1] = d;
            }
            for &c in &self.children[v] {
                stack.push((c, d + 1));
            }
        }
        out
    }
}

/// An alpha-gamma tree with `n` leaves.
pub fn grow_alphagamma<R: Rng + ?Sized>(alpha: f64, gamma: f64, n: usize, rng: &mut R) -> Result<GrownTree> {
    if n == 0 {
        return Err(Error::arg("a tree needs at least one leaf"));
    }
    let mut g = AlphaGammaGrower::new(alpha, gamma)?;
    g.grow_to(n, rng)?;
    Ok(g.snapshot())
}

/// A source of root splits: a random partition of `[n]` for any `n ≥ 2`.
pub trait SplitSampler {
    fn sample_split<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<Partition>;
}

/// Draws from a table by inversion over its canonical order.
pub fn sample_from_table<R: Rng + ?Sized>(t: &SplittingRuleTable, rng: &mut R) -> Partition {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (p, &v) in t.probs() {
        if v <= 0.0 {
            continue;
        }
        acc += v;
        last = Some(p);
        if u < acc {
            return p.clone();
        }
    }
    last.expect("table has positive mass").clone()
}

/// Splits drawn from tables produced on demand and cached per size.
pub struct TableSplitter<F> {
    source: F,
    cache: HashMap<usize, SplittingRuleTable>,
}

impl<F: FnMut(usize) -> Result<SplittingRuleTable>> TableSplitter<F> {
    pub fn new(source: F) -> Self {
        TableSplitter {
            source,
            cache: HashMap::new(),
        }
    }
}

impl<F: FnMut(usize) -> Result<SplittingRuleTable>> SplitSampler for TableSplitter<F> {
    fn sample_split<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<Partition> {
        if !self.cache.contains_key(&n) {
            let t = (self.source)(n)?;
            if t.n() != n {
                return Err(Error::arg(format!("rule source returned a table for n = {}", t.n())));
            }
            self.cache.insert(n, t);
        }
        Ok(sample_from_table(&self.cache[&n], rng))
    }
}

/// Exact root splits of a [`DiscreteDislocation`] for any `n`, without
/// enumerating `P_n`: pick a component of `κ` by its mass on `P_n`, then
/// draw from the paintbox conditioned on the class.
pub struct DislocationSplitter<'a> {
    d: &'a DiscreteDislocation,
}

impl<'a> DislocationSplitter<'a> {
    pub fn new(d: &'a DiscreteDislocation) -> Self {
        DislocationSplitter { d }
    }
}

enum Component<'a> {
    /// Paintbox `s` restricted to class `j`.
    Level(&'a MassPartition, usize),
    /// Paintbox `s` on the classes `j ≥ m`.
    Tail(&'a MassPartition, usize),
    /// `{label}` split from the rest.
    Epsilon(usize),
    /// `[j]` followed by singletons.
    Omega(usize),
}

fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Paint label `r` from `s`, excluding atom `avoid` (index into atoms).
fn paint_avoiding<R: Rng + ?Sized>(s: &MassPartition, avoid: Option<usize>, r: usize, rng: &mut R) -> i64 {
    let mut w: Vec<f64> = s.atoms().to_vec();
    if let Some(a) = avoid {
        w[a] = 0.0;
    }
    w.push(s.dust());
    let i = draw_index(&w, rng);
    if i == s.len() {
        -(r as i64)
    } else {
        i as i64 + 1
    }
}

/// Labels for a class-`j` draw where `first` is the atom shared by `1..=j`
/// (`None` for dust, only possible when `j = 1`).
fn class_labels<R: Rng + ?Sized>(s: &MassPartition, first: Option<usize>, j: usize, n: usize, rng: &mut R) -> Vec<i64> {
    let mut labels = Vec::with_capacity(n);
    for r in 1..=j {
        labels.push(match first {
            Some(i) => i as i64 + 1,
            None => -(r as i64),
        });
    }
    labels.push(paint_avoiding(s, first, j + 1, rng));
    for r in j + 2..=n {
        labels.push(paint_avoiding(s, None, r, rng));
    }
    labels
}

impl SplitSampler for DislocationSplitter<'_> {
    fn sample_split<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<Partition> {
        if n < 2 {
            return Err(Error::arg("splits need n >= 2"));
        }
        let d = self.d;
        let m = d.m_cap();
        let mut comps: Vec<Component> = Vec::new();
        let mut weights = Vec::new();
        for j in 1..(n.min(m)) {
            for a in d.level(j) {
                let f: f64 = a.s.atoms().iter().map(|s| s.powi(j as i32) * (1.0 - s)).sum();
                comps.push(Component::Level(&a.s, j));
                weights.push(a.weight * (f + if j == 1 { a.s.dust() } else { 0.0 }));
            }
        }
        if n > m {
            for a in d.level(m) {
                let f: f64 = a.s.atoms().iter().map(|s| s.powi(m as i32) - s.powi(n as i32)).sum();
                comps.push(Component::Tail(&a.s, m));
                weights.push(a.weight * (f + if m == 1 { a.s.dust() } else { 0.0 }));
            }
        }
        comps.push(Component::Epsilon(1));
        weights.push(d.c(1));
        for j in 1..n {
            comps.push(Component::Epsilon(j + 1));
            weights.push(d.c(j));
            comps.push(Component::Omega(j));
            weights.push(d.k(j));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Model(format!("rate lambda_{n} is zero")));
        }
        let labels: Vec<i64> = match comps[draw_index(&weights, rng)] {
            Component::Level(s, j) => {
                let mut w: Vec<f64> = s.atoms().iter().map(|x| x.powi(j as i32) * (1.0 - x)).collect();
                w.push(if j == 1 { s.dust() } else { 0.0 });
                let i = draw_index(&w, rng);
                class_labels(s, (i < s.len()).then_some(i), j, n, rng)
            }
            Component::Tail(s, m) => {
                let mut w: Vec<f64> = s.atoms().iter().map(|x| x.powi(m as i32) - x.powi(n as i32)).collect();
                w.push(if m == 1 { s.dust() } else { 0.0 });
                let i = draw_index(&w, rng);
                if i == s.len() {
                    class_labels(s, None, 1, n, rng)
                } else {
                    // P(j) ∝ s^j (1 − s) on m ≤ j ≤ n − 1.
                    let x = s.atoms()[i];
                    let mut u = rng.random::<f64>() * (x.powi(m as i32) - x.powi(n as i32));
                    let mut j = m;
                    while j < n - 1 {
                        u -= x.powi(j as i32) * (1.0 - x);
                        if u < 0.0 {
                            break;
                        }
                        j += 1;
                    }
                    class_labels(s, Some(i), j, n, rng)
                }
            }
            Component::Epsilon(l) => (1..=n).map(|r| i64::from(r == l)).collect(),
            Component::Omega(j) => (1..=n).map(|r| if r <= j { 0 } else { r as i64 }).collect(),
        };
        Partition::from_values(&labels)
    }
}

/// Recursive Markov branching tree on `[n]`: split `[n]`, then split each
/// block `B` by a fresh draw for `|B|` pushed forward along the increasing
/// bijection `[|B|] → B`.
pub fn sample_markov_branching<S: SplitSampler, R: Rng + ?Sized>(splitter: &mut S, n: usize, rng: &mut R) -> Result<GrownTree> {
    if n == 0 {
        return Err(Error::arg("a tree needs at least one leaf"));
    }
    let mut parent = vec![None];
    let mut label = vec![None];
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, (1..=n).collect())];
    while let Some((v, block)) = stack.pop() {
        if block.len() == 1 {
            label[v] = Some(block[0]);
            continue;
        }
        let pi = splitter.sample_split(block.len(), rng)?;
        if pi.is_trivial() {
            return Err(Error::Model("split returned the trivial partition".into()));
        }
        for child in pi.push_forward(&block)? {
            let c = parent.len();
            parent.push(Some(v));
            label.push(None);
            stack.push((c, child));
        }
    }
    GrownTree::from_parts(&parent, &label)
}

/// Convenience wrapper drawing the rule for each size from `rule_source`.
pub fn sample_markov_branching_from<F, R>(rule_source: F, n: usize, rng: &mut R) -> Result<GrownTree>
where
    F: FnMut(usize) -> Result<SplittingRuleTable>,
    R: Rng + ?Sized,
{
    sample_markov_branching(&mut TableSplitter::new(rule_source), n, rng)
}

/// `reduced_tree(T_n, [k])` of a Markov branching tree, sampled by only
/// splitting blocks that contain one of the labels `1..=k`.
///
/// Within a block the labels of `[k]` are its smallest elements, so a block
/// is tracked by its size and how many of them it holds.
pub fn sample_reduced_markov_branching<S: SplitSampler, R: Rng + ?Sized>(
    splitter: &mut S,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<MetricTree> {
    if k == 0 || k > n {
        return Err(Error::arg(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut parent = vec![None];
    let mut len = vec![0.0];
    let mut lab = vec![None];
    // (kept ancestor, unit edges since it, block size, marked labels)
    let mut stack: Vec<(usize, usize, usize, Vec<usize>)> = vec![(0, 1, n, (1..=k).collect())];
    while let Some((anc, dist, size, marked)) = stack.pop() {
        if size == 1 {
            parent.push(Some(anc));
            len.push(dist as f64);
            lab.push(Some(marked[0]));
            continue;
        }
        let pi = splitter.sample_split(size, rng)?;
        let c = marked.len();
        let children: Vec<(usize, Vec<usize>)> = pi
            .blocks()
            .iter()
            .filter(|b| b[0] <= c)
            .map(|b| (b.len(), b.iter().take_while(|&&x| x <= c).map(|&x| marked[x - 1]).collect()))
            .collect();
        if children.len() == 1 {
            let (s, m) = children.into_iter().next().expect("one");
            stack.push((anc, dist + 1, s, m));
        } else {
            let v = parent.len();
            parent.push(Some(anc));
            len.push(dist as f64);
            lab.push(None);
            for (s, m) in children.into_iter().rev() {
                stack.push((v, 1, s, m));
            }
        }
    }
    MetricTree::new(parent, len, lab)
}

/// An unlabelled skewed Poisson-Dirichlet tree with `n ≤ 4` leaves built
/// from the ranked split laws; labels are assigned block by block and carry
/// no meaning.
pub fn sample_skewed_pd_tree<R: Rng + ?Sized>(alpha: f64, theta: f64, lambda: f64, n: usize, rng: &mut R) -> Result<GrownTree> {
    if !(1..=4).contains(&n) {
        return Err(Error::arg(format!("skewed PD trees are available for 1 <= n <= 4, got {n}")));
    }
    let mut laws: BTreeMap<usize, BTreeMap<Vec<usize>, f64>> = BTreeMap::new();
    for m in 2..=n {
        laws.insert(m, skewed_pd_ranked_split(alpha, theta, lambda, m)?);
    }
    let mut parent = vec![None];
    let mut label = vec![None];
    let mut next_label = 1;
    let mut stack = vec![(0usize, n)];
    while let Some((v, size)) = stack.pop() {
        if size == 1 {
            label[v] = Some(next_label);
            next_label += 1;
            continue;
        }
        let law = &laws[&size];
        let weights: Vec<f64> = law.values().copied().collect();
        let sizes = law.keys().nth(draw_index(&weights, rng)).expect("index").clone();
        for s in sizes {
            let c = parent.len();
            parent.push(Some(v));
            label.push(None);
            stack.push((c, s));
        }
    }
    GrownTree::from_parts(&parent, &label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dislocation::splitting_rule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cherry() -> GrownTree {
        GrownTree::from_parts(&[None, Some(0), Some(0)], &[None, Some(1), Some(2)]).unwrap()
    }

    #[test]
    fn canonical_form_ignores_input_order() {
        let a = GrownTree::from_parts(&[None, Some(0), Some(0), Some(1), Some(1)], &[None, None, Some(2), Some(3), Some(1)]).unwrap();
        let b = GrownTree::from_parts(&[Some(2), Some(2), None, Some(4), Some(2), Some(4)], &[Some(3), Some(1), None, Some(2), None, Some(4)]);
        assert_eq!(b.unwrap().newick(), "(1,(2,4),3);");
        assert!(GrownTree::from_parts(&[None, Some(0)], &[None, Some(1)]).is_err());
        assert_eq!(a.newick(), "((1,3),2);");
        assert_eq!(a.shape_key(), "((*,*),*)");
        let h = Hierarchy::new(3, vec![vec![1], vec![2], vec![3], vec![1, 3], vec![1, 2, 3]]).unwrap();
        assert_eq!(GrownTree::from_hierarchy(&h).unwrap(), a);
        assert_eq!(a.to_hierarchy(), h);
    }

    #[test]
    fn small_growth() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(grow_alphagamma(0.5, 0.3, 2, &mut rng).unwrap(), cherry());
        assert_eq!(grow_alphagamma(0.5, 0.3, 1, &mut rng).unwrap(), GrownTree::leaf());
        assert!(grow_alphagamma(0.3, 0.5, 3, &mut rng).is_err());
    }

    #[test]
    fn ford_trees_are_binary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let t = grow_alphagamma(0.6, 0.6, 30, &mut rng).unwrap();
            for v in 0..t.num_vertices() {
                assert!(t.label(v).is_some() || t.children(v).len() == 2);
            }
        }
    }

    #[test]
    fn growth_is_consistent_under_restriction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut g = AlphaGammaGrower::new(0.4, 0.2).unwrap();
        g.grow_to(8, &mut rng).unwrap();
        let t8 = g.snapshot();
        g.grow_to(20, &mut rng).unwrap();
        assert_eq!(g.snapshot().restrict(8).unwrap(), t8);
        let hier = g.snapshot().to_hierarchy().restrict(8).unwrap();
        assert_eq!(GrownTree::from_hierarchy(&hier).unwrap(), t8);
    }

    #[test]
    fn depth_conventions() {
        let c = cherry();
        assert_eq!(spine_depth(&c, 1).unwrap(), 2);
        assert_eq!(spine_depth(&GrownTree::leaf(), 1).unwrap(), 1);
        let s = GrownTree::star(5).unwrap();
        for l in 1..=5 {
            assert_eq!(spine_depth(&s, l).unwrap(), 2);
        }
        assert!(spine_depth(&s, 6).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = AlphaGammaGrower::new(0.5, 0.4).unwrap();
        g.grow_to(40, &mut rng).unwrap();
        let t = g.snapshot();
        let d = g.leaf_depths();
        for l in 1..=40 {
            assert_eq!(spine_depth(&t, l).unwrap(), d[l - 1]);
        }
    }

    #[test]
    fn reduced_tree_examples() {
        let c = cherry();
        let r = reduced_tree(&c, &[1]).unwrap();
        assert_eq!(r.newick(), "1:2;");
        let full = reduced_tree(&c, &[1, 2]).unwrap();
        assert_eq!(full.newick(), "(1:1,2:1):1;");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = grow_alphagamma(0.5, 0.3, 12, &mut rng).unwrap();
        let one = reduced_tree(&t, &[1]).unwrap();
        assert_eq!(one.total_length(), spine_depth(&t, 1).unwrap() as f64);
        let all: Vec<usize> = (1..=12).collect();
        assert_eq!(reduced_tree(&t, &all).unwrap().num_vertices(), t.num_vertices() + 1);
        assert!(reduced_tree(&t, &[]).is_err());
    }

    #[test]
    fn special_branch_examples() {
        // The leaf's own sibling block keeps label 1 at the cherry's root.
        assert_eq!(special_branch_count(&cherry(), 1, 1).unwrap(), 0);
        assert_eq!(special_branch_count(&cherry(), 2, 1).unwrap(), 1);
        assert_eq!(special_branch_count(&GrownTree::star(4).unwrap(), 2, 1).unwrap(), 1);
        // Caterpillar (((1,2),3),4): labels 1, 2 stay together until the end.
        let cat = GrownTree::from_parts(
            &[None, Some(0), Some(1), Some(2), Some(2), Some(1), Some(0)],
            &[None, None, None, Some(1), Some(2), Some(3), Some(4)],
        )
        .unwrap();
        assert_eq!(special_branch_count(&cat, 2, 2).unwrap(), 1);
        assert_eq!(special_branch_count(&cat, 4, 1).unwrap(), 1);
    }

    #[test]
    fn leaf_deletion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(delete_uniform_leaf(&cherry(), &mut rng).unwrap(), GrownTree::leaf());
        assert!(delete_uniform_leaf(&GrownTree::leaf(), &mut rng).is_err());
        let t = grow_alphagamma(0.5, 0.3, 9, &mut rng).unwrap();
        let u = delete_uniform_leaf(&t, &mut rng).unwrap();
        assert_eq!(u.n(), 8);
    }

    #[test]
    fn markov_branching_small_cases() {
        let d = DiscreteDislocation::single_atom();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = sample_markov_branching_from(|n| splitting_rule(&d, n), 2, &mut rng).unwrap();
        assert_eq!(t, cherry());
        let t = sample_markov_branching_from(|n| splitting_rule(&d, n), 1, &mut rng).unwrap();
        assert_eq!(t, GrownTree::leaf());
        let mut direct = DislocationSplitter::new(&d);
        for _ in 0..100 {
            let p = direct.sample_split(3, &mut rng).unwrap();
            assert!(p == "1|2 3".parse().unwrap() || p == "1 3|2".parse().unwrap());
        }
    }

    #[test]
    fn pruned_sampler_matches_reduced_tree_shape() {
        let d = DiscreteDislocation::single_atom();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = DislocationSplitter::new(&d);
        let r = sample_reduced_markov_branching(&mut s, 1000, 2, &mut rng).unwrap();
        // 1 and 2 are separated at the first split.
        assert_eq!(r.num_vertices(), 4);
        assert_eq!(r.edge_length(1), 1.0);
    }

    #[test]
    fn skewed_pd_trees_have_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=4 {
            assert_eq!(sample_skewed_pd_tree(0.5, -0.5, 0.9, n, &mut rng).unwrap().n(), n);
        }
    }
}
