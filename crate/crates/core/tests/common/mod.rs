#![allow(dead_code)]

use lesc::{DirectedGraph, Labeling};
use proptest::prelude::*;
use rand::Rng;

/// Simple directed graph on `n` vertices without reciprocal pairs.
pub fn random_simple_graph(n: usize, density: f64, seed: u64) -> DirectedGraph {
    let mut rng = lesc::rng::rng_from_seed(seed);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < density {
                pairs.push(if rng.random::<bool>() { (u, v) } else { (v, u) });
            }
        }
    }
    DirectedGraph::from_pairs(n, pairs).unwrap()
}

pub fn random_bipartition(n: usize, seed: u64) -> Labeling {
    let mut rng = lesc::rng::rng_from_seed(seed);
    loop {
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        if a.contains(&0) && a.contains(&1) {
            return Labeling::new(a, 2).unwrap();
        }
    }
}

pub fn graph_strategy(max_n: usize) -> impl Strategy<Value = DirectedGraph> {
    (2..=max_n, 0.0f64..0.6, any::<u64>()).prop_map(|(n, d, s)| random_simple_graph(n, d, s))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
