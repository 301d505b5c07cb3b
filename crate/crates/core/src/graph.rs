//! Sparse weighted directed graphs, community labelings and cut-flow statistics.
//!
//! A [`DirectedGraph`] stores both the out-edge (row) and in-edge (column)
//! adjacency in compressed form. Graphs are immutable once built, so every
//! accessor can be shared freely across threads.

use crate::error::{Error, Result};

/// Sparse weighted directed graph on `n` vertices without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    out_weights: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
    in_weights: Vec<f64>,
}

impl DirectedGraph {
    /// Builds a graph from `(src, dst, weight)` triples.
    ///
    /// Repeated `(src, dst)` pairs are merged by summing their weights.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::GraphTooSmall { n, min: 1 });
        }
        let mut triples: Vec<(usize, usize, f64)> = Vec::new();
        for (src, dst, weight) in edges {
            for index in [src, dst] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if src == dst {
                return Err(Error::SelfLoop(src));
            }
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::NegativeWeight { src, dst, weight });
            }
            triples.push((src, dst, weight));
        }
        // Stable sort keeps the input order of duplicates, so the merged
        // weight is summed in a fixed order.
        triples.sort_by_key(|&(s, d, _)| (s, d));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triples.len());
        for (s, d, w) in triples {
            match merged.last_mut() {
                Some(last) if last.0 == s && last.1 == d => last.2 += w,
                _ => merged.push((s, d, w)),
            }
        }
        Ok(Self::from_sorted_unique(n, &merged))
    }

    /// Builds an unweighted graph (all weights 1).
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(n, pairs.into_iter().map(|(s, d)| (s, d, 1.0)))
    }

    fn from_sorted_unique(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let m = edges.len();
        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(s, d, _) in edges {
            out_offsets[s + 1] += 1;
            in_offsets[d + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets = edges.iter().map(|e| e.1).collect();
        let out_weights = edges.iter().map(|e| e.2).collect();

        // Edges are sorted by (src, dst), so filling columns in this order
        // leaves every in-edge list sorted by source.
        let mut in_sources = vec![0usize; m];
        let mut in_weights = vec![0.0; m];
        let mut cursor = in_offsets.clone();
        for &(s, d, w) in edges {
            in_sources[cursor[d]] = s;
            in_weights[cursor[d]] = w;
            cursor[d] += 1;
        }
        Self {
            n,
            out_offsets,
            out_targets,
            out_weights,
            in_offsets,
            in_sources,
            in_weights,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct directed edges.
    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Sum of all edge weights; equals [`edge_count`](Self::edge_count) for binary graphs.
    pub fn total_weight(&self) -> f64 {
        self.out_weights.iter().sum()
    }

    /// All edges in row order, i.e. sorted by `(src, dst)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| self.out_edges(u).map(move |(v, w)| (u, v, w)))
    }

    /// Out-neighbours of `u` with weights, sorted by target.
    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.out_offsets[u]..self.out_offsets[u + 1];
        self.out_targets[range.clone()]
            .iter()
            .copied()
            .zip(self.out_weights[range].iter().copied())
    }

    /// In-neighbours of `v` with weights, sorted by source.
    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.in_offsets[v]..self.in_offsets[v + 1];
        self.in_sources[range.clone()]
            .iter()
            .copied()
            .zip(self.in_weights[range].iter().copied())
    }

    pub fn out_degree(&self, u: usize) -> f64 {
        self.out_edges(u).map(|(_, w)| w).sum()
    }

    pub fn in_degree(&self, v: usize) -> f64 {
        self.in_edges(v).map(|(_, w)| w).sum()
    }

    /// Weight of edge `u -> v`, zero when absent.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        let range = self.out_offsets[u]..self.out_offsets[u + 1];
        match self.out_targets[range.clone()].binary_search(&v) {
            Ok(pos) => self.out_weights[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// First pair `u < v` with edges in both directions, if any.
    pub fn find_reciprocal_pair(&self) -> Option<(usize, usize)> {
        self.edges()
            .find(|&(u, v, _)| u < v && self.weight(v, u) > 0.0)
            .map(|(u, v, _)| (u, v))
    }

    /// First edge whose weight is not exactly 1, if any.
    pub fn find_non_unit_edge(&self) -> Option<(usize, usize, f64)> {
        self.edges().find(|&(_, _, w)| w != 1.0)
    }

    /// Subgraph induced by `vertices`; vertex `vertices[i]` becomes `i`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Self> {
        let mut position = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return Err(Error::IndexOutOfRange { index: v, n: self.n });
            }
            if position[v] != usize::MAX {
                return Err(Error::OverlappingSets(v));
            }
            position[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for (v, w) in self.out_edges(u) {
                if position[v] != usize::MAX {
                    edges.push((i, position[v], w));
                }
            }
        }
        Self::new(vertices.len(), edges)
    }

    /// The same graph with every edge reversed.
    pub fn reversed(&self) -> Self {
        Self {
            n: self.n,
            out_offsets: self.in_offsets.clone(),
            out_targets: self.in_sources.clone(),
            out_weights: self.in_weights.clone(),
            in_offsets: self.out_offsets.clone(),
            in_sources: self.out_targets.clone(),
            in_weights: self.out_weights.clone(),
        }
    }

    /// Degree-normalized copy `D^{-1/2} A D^{-1/2}`, where the degree of a
    /// vertex counts both incoming and outgoing weight.
    pub fn symmetric_normalize(&self) -> Self {
        let scale: Vec<f64> = (0..self.n)
            .map(|u| {
                let deg = self.out_degree(u) + self.in_degree(u);
                if deg > 0.0 {
                    1.0 / deg.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let edges: Vec<(usize, usize, f64)> = self
            .edges()
            .map(|(u, v, w)| (u, v, w * scale[u] * scale[v]))
            .collect();
        Self::from_sorted_unique(self.n, &edges)
    }
}

/// Community assignment of every vertex to one of `k` groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    assignments: Vec<usize>,
    k: usize,
}

impl Labeling {
    pub fn new(assignments: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&label) = assignments.iter().find(|&&c| c >= k) {
            return Err(Error::LabelOutOfRange { label, k });
        }
        Ok(Self { assignments, k })
    }

    /// Infers `k` as one more than the largest label.
    pub fn from_assignments(assignments: Vec<usize>) -> Self {
        let k = assignments.iter().max().map_or(1, |&m| m + 1);
        Self { assignments, k }
    }

    /// Two-way labeling where `true` marks community 1.
    pub fn from_indicator(in_second: &[bool]) -> Self {
        Self {
            assignments: in_second.iter().map(|&b| usize::from(b)).collect(),
            k: 2,
        }
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn get(&self, vertex: usize) -> usize {
        self.assignments[vertex]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignments {
            sizes[c] += 1;
        }
        sizes
    }

    /// Vertices assigned to `community`, ascending.
    pub fn members(&self, community: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&u| self.assignments[u] == community)
            .collect()
    }

    /// Swaps the two labels of a two-way labeling.
    pub fn swapped(&self) -> Self {
        debug_assert_eq!(self.k, 2);
        Self {
            assignments: self.assignments.iter().map(|&c| 1 - c).collect(),
            k: 2,
        }
    }

    /// Two-way labeling relabeled so that vertex 0 lies in community 0.
    pub fn canonical(&self) -> Self {
        if self.k == 2 && self.assignments.first() == Some(&1) {
            self.swapped()
        } else {
            self.clone()
        }
    }

    pub fn into_assignments(self) -> Vec<usize> {
        self.assignments
    }

    pub(crate) fn check_bipartition(&self, n: usize) -> Result<()> {
        if self.k != 2 {
            return Err(Error::WrongCommunityCount {
                expected: 2,
                actual: self.k,
            });
        }
        if self.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

/// Weighted edge counts crossing a bipartition in each direction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CutFlows {
    /// Weight of edges from community 0 to community 1, `|C1 -> C2|`.
    pub forward: f64,
    /// Weight of edges from community 1 to community 0, `|C2 -> C1|`.
    pub backward: f64,
}

impl CutFlows {
    pub fn total(&self) -> f64 {
        self.forward + self.backward
    }

    pub fn net(&self) -> f64 {
        self.forward - self.backward
    }
}

/// Directed cross-cut weights for a two-way labeling (community 0 is `C1`).
pub fn cut_flows(g: &DirectedGraph, part: &Labeling) -> Result<CutFlows> {
    part.check_bipartition(g.n())?;
    let labels = part.assignments();
    let mut flows = CutFlows::default();
    for (u, v, w) in g.edges() {
        match (labels[u], labels[v]) {
            (0, 1) => flows.forward += w,
            (1, 0) => flows.backward += w,
            _ => {}
        }
    }
    Ok(flows)
}

/// Total flow `TF(C1, C2)`: weight of all edges between the two communities.
pub fn total_flow(g: &DirectedGraph, part: &Labeling) -> Result<f64> {
    cut_flows(g, part).map(|f| f.total())
}

/// Net flow `NF(C1, C2)`: edges `C1 -> C2` minus edges `C2 -> C1`.
pub fn net_flow(g: &DirectedGraph, part: &Labeling) -> Result<f64> {
    cut_flows(g, part).map(|f| f.net())
}

/// Weight of edges from any vertex in `from` to any vertex in `to`.
pub fn directed_count(g: &DirectedGraph, from: &[usize], to: &[usize]) -> Result<f64> {
    let n = g.n();
    let mut in_to = vec![false; n];
    for &v in to {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, n });
        }
        in_to[v] = true;
    }
    for &u in from {
        if u >= n {
            return Err(Error::IndexOutOfRange { index: u, n });
        }
        if in_to[u] {
            return Err(Error::OverlappingSets(u));
        }
    }
    let mut sorted: Vec<usize> = from.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted
        .iter()
        .flat_map(|&u| g.out_edges(u))
        .filter(|&(v, _)| in_to[v])
        .map(|(_, w)| w)
        .sum())
}
