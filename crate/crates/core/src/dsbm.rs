//! Samplers for the directed stochastic block model (DSBM).
//!
//! Within a community an edge appears with probability `p` and points either
//! way with probability 1/2. Between communities an edge appears with
//! probability `q`, and its orientation is governed by the meta-graph: for an
//! oriented community pair `(a, b)` it points `a -> b` with probability
//! `1 - eta`; unlisted pairs are oriented uniformly at random. No sample ever
//! contains a reciprocal pair.
//!
//! Vertices are numbered community by community, community 0 first. Pairs
//! `u < v` are visited in lexicographic order and pair `k` reads its two
//! uniforms from a fixed window of the ChaCha8 stream (see
//! [`PairStream`](crate::rng::PairStream)), so samples are identical for any
//! thread count.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Labeling};
use crate::rng::{derive_seed, pair_index, rng_from_seed, stage, PairStream};

/// Community sizes and edge probabilities of a DSBM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsbmParams {
    pub sizes: Vec<usize>,
    pub p: f64,
    pub q: f64,
    pub eta: f64,
}

impl DsbmParams {
    pub fn new(sizes: Vec<usize>, p: f64, q: f64, eta: f64) -> Result<Self> {
        let params = Self { sizes, p, q, eta };
        params.validate()?;
        Ok(params)
    }

    /// Two-community model with source community of size `n1`.
    pub fn two(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> Result<Self> {
        Self::new(vec![n1, n2], p, q, eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::BadParams(
                "community sizes must be nonempty and positive".into(),
            ));
        }
        for (name, value) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::BadParams(format!("{name} = {value} not in [0, 1]")));
            }
        }
        if !(0.0..=0.5).contains(&self.eta) {
            return Err(Error::BadParams(format!(
                "eta = {} not in [0, 0.5]",
                self.eta
            )));
        }
        Ok(())
    }

    /// Total vertex count `N`.
    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// The planted labeling: the first `sizes[0]` vertices form community 0, and so on.
    pub fn planted_labels(&self) -> Labeling {
        let assignments = self
            .sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &size)| std::iter::repeat_n(c, size))
            .collect();
        Labeling::new(assignments, self.k()).expect("labels below k by construction")
    }
}

/// Community-level orientation structure of a multi-community DSBM.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaGraph {
    pub k: usize,
    pub oriented_pairs: Vec<[usize; 2]>,
}

impl MetaGraph {
    pub fn new(k: usize, oriented_pairs: Vec<[usize; 2]>) -> Result<Self> {
        let meta = Self { k, oriented_pairs };
        meta.validate()?;
        Ok(meta)
    }

    /// The two-community source/sink model: `0 -> 1`.
    pub fn source_sink() -> Self {
        Self {
            k: 2,
            oriented_pairs: vec![[0, 1]],
        }
    }

    /// Directed path `0 -> 1 -> ... -> k-1`.
    pub fn path(k: usize) -> Self {
        Self {
            k,
            oriented_pairs: (1..k).map(|b| [b - 1, b]).collect(),
        }
    }

    /// Directed cycle `0 -> 1 -> ... -> k-1 -> 0`.
    pub fn cycle(k: usize) -> Self {
        Self {
            k,
            oriented_pairs: (0..k).map(|a| [a, (a + 1) % k]).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &[a, b] in &self.oriented_pairs {
            if a >= self.k || b >= self.k {
                return Err(Error::BadParams(format!(
                    "meta-edge ({a}, {b}) references a community >= k = {}",
                    self.k
                )));
            }
            if a == b {
                return Err(Error::BadParams(format!("meta-edge ({a}, {a}) is a loop")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::BadParams(format!(
                    "community pair ({a}, {b}) listed more than once"
                )));
            }
        }
        Ok(())
    }

    /// Dense `k x k` table of the probability that a cross edge between
    /// communities `a` and `b` points `a -> b`.
    pub fn orientation_table(&self, eta: f64) -> Vec<Vec<f64>> {
        let mut table = vec![vec![0.5; self.k]; self.k];
        for &[a, b] in &self.oriented_pairs {
            table[a][b] = 1.0 - eta;
            table[b][a] = eta;
        }
        table
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let meta: Self =
            serde_json::from_str(text).map_err(|e| Error::BadParams(format!("meta-graph: {e}")))?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("meta-graph serializes")
    }
}

/// Samples the two-community DSBM; community 0 is the source.
pub fn sample_dsbm2(params: &DsbmParams, seed: u64) -> Result<(DirectedGraph, Labeling)> {
    params.validate()?;
    if params.k() != 2 {
        return Err(Error::BadParams(format!(
            "two-community model needs 2 sizes, got {}",
            params.k()
        )));
    }
    sample_dsbm_meta(params, &MetaGraph::source_sink(), seed)
}

/// Samples a multi-community DSBM whose cross-community orientations follow `meta`.
pub fn sample_dsbm_meta(
    params: &DsbmParams,
    meta: &MetaGraph,
    seed: u64,
) -> Result<(DirectedGraph, Labeling)> {
    params.validate()?;
    meta.validate()?;
    if meta.k != params.k() {
        return Err(Error::MetaMismatch(format!(
            "meta-graph has k = {} but the model has {} communities",
            meta.k,
            params.k()
        )));
    }
    let labels = params.planted_labels();
    let n = params.n();
    let orient = meta.orientation_table(params.eta);
    let community = labels.assignments();

    let rows: Vec<Vec<(usize, usize)>> = (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|u| {
            let mut stream = PairStream::new(seed);
            stream.seek(pair_index(u, u + 1, n));
            let mut out = Vec::new();
            for v in u + 1..n {
                let (presence, orientation) = stream.next_pair();
                let (a, b) = (community[u], community[v]);
                let (prob, forward) = if a == b {
                    (params.p, 0.5)
                } else {
                    (params.q, orient[a][b])
                };
                if presence < prob {
                    out.push(if orientation < forward { (u, v) } else { (v, u) });
                }
            }
            out
        })
        .collect();
    let g = DirectedGraph::from_pairs(n, rows.into_iter().flatten())?;
    Ok((g, labels))
}

/// Applies a seeded random relabeling of the vertices to a graph and its labels.
pub fn shuffle_vertices(
    g: &DirectedGraph,
    labels: &Labeling,
    seed: u64,
) -> Result<(DirectedGraph, Labeling)> {
    let n = g.n();
    if labels.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_from_seed(derive_seed(seed, stage::SHUFFLE, 0)));
    let graph = DirectedGraph::new(n, g.edges().map(|(u, v, w)| (perm[u], perm[v], w)))?;
    let mut assignments = vec![0; n];
    for (old, &new) in perm.iter().enumerate() {
        assignments[new] = labels.get(old);
    }
    Ok((graph, Labeling::new(assignments, labels.k())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_extreme_probabilities() {
        let params = DsbmParams::two(1, 1, 1.0, 1.0, 0.0).unwrap();
        for seed in [0, 1, 99] {
            let (g, labels) = sample_dsbm2(&params, seed).unwrap();
            assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 1.0)]);
            assert_eq!(labels.assignments(), &[0, 1]);
        }
        let params = DsbmParams::two(5, 7, 0.0, 0.0, 0.2).unwrap();
        let (g, _) = sample_dsbm2(&params, 3).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn complete_graph_has_no_reciprocal_pairs() {
        let params = DsbmParams::two(4, 4, 1.0, 1.0, 0.0).unwrap();
        let (g, _) = sample_dsbm2(&params, 7).unwrap();
        assert_eq!(g.edge_count(), 28);
        assert_eq!(g.find_reciprocal_pair(), None);
        for u in 0..4 {
            for v in 4..8 {
                assert_eq!(g.weight(u, v), 1.0);
            }
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let params = DsbmParams::two(50, 60, 0.1, 0.05, 0.2).unwrap();
        let a = sample_dsbm2(&params, 11).unwrap();
        let b = sample_dsbm2(&params, 11).unwrap();
        let c = sample_dsbm2(&params, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn two_community_meta_reduces_to_dsbm2() {
        let params = DsbmParams::two(30, 20, 0.2, 0.3, 0.1).unwrap();
        let direct = sample_dsbm2(&params, 5).unwrap();
        let via_meta = sample_dsbm_meta(&params, &MetaGraph::source_sink(), 5).unwrap();
        assert_eq!(direct, via_meta);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(
            DsbmParams::two(1, 1, 1.5, 0.0, 0.0),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            DsbmParams::two(1, 1, 0.5, 0.5, 0.6),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            DsbmParams::new(vec![], 0.5, 0.5, 0.1),
            Err(Error::BadParams(_))
        ));
        let three = DsbmParams::new(vec![2, 2, 2], 0.5, 0.5, 0.1).unwrap();
        assert!(matches!(sample_dsbm2(&three, 0), Err(Error::BadParams(_))));
        assert!(matches!(
            sample_dsbm_meta(&three, &MetaGraph::path(2), 0),
            Err(Error::MetaMismatch(_))
        ));
        assert!(matches!(
            MetaGraph::new(2, vec![[0, 1], [1, 0]]),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(MetaGraph::new(2, vec![[1, 1]]), Err(Error::BadParams(_))));
    }

    #[test]
    fn meta_json_schema() {
        let meta = MetaGraph::from_json(r#"{"k": 3, "oriented_pairs": [[0,1],[1,2]]}"#).unwrap();
        assert_eq!(meta, MetaGraph::path(3));
        assert_eq!(MetaGraph::from_json(&meta.to_json()).unwrap(), meta);
        assert!(MetaGraph::from_json(r#"{"k": 2, "oriented_pairs": [[0,5]]}"#).is_err());
    }

    #[test]
    fn shuffle_preserves_structure() {
        let params = DsbmParams::two(10, 10, 0.3, 0.3, 0.1).unwrap();
        let (g, labels) = sample_dsbm2(&params, 1).unwrap();
        let (h, shuffled) = shuffle_vertices(&g, &labels, 9).unwrap();
        assert_eq!(h.edge_count(), g.edge_count());
        assert_eq!(shuffled.sizes(), labels.sizes());
        let tf = crate::graph::total_flow(&g, &labels).unwrap();
        assert_eq!(crate::graph::total_flow(&h, &shuffled).unwrap(), tf);
    }
}
