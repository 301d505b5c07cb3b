mod common;

use common::{graph_strategy, random_bipartition, random_simple_graph};
use lesc::mle::{decode, flow_objective, probability_floor, smallest_argmax};
use lesc::{
    build_operator, estimate_params, exhaustive_mle, log_likelihood, mle_weights, quadratic_form, sample_dsbm2,
    sample_dsbm_meta, DenseHermitian, DirectedGraph, DsbmParams, Labeling, MetaGraph, ModelParams,
};
use proptest::prelude::*;
use rand::Rng;

fn random_params(seed: u64, n: usize) -> ModelParams {
    let mut rng = lesc::rng::rng_from_seed(seed);
    ModelParams::new(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95), rng.random_range(0.0..0.5)).clamped(n)
}

#[test]
fn quadratic_form_argmax_is_the_mle() {
    for trial in 0..10 {
        let params = random_params(trial, 8);
        let dsbm = DsbmParams::two(4, 4, params.p, params.q, params.eta).unwrap();
        let (g, _) = sample_dsbm2(&dsbm, 100 + trial).unwrap();
        let w = params.weights();
        let forms: Vec<f64> = (0u64..1 << 8)
            .map(|mask| {
                let labels = decode(mask, 8);
                match Labeling::new(labels, 2) {
                    Ok(part) if part.sizes().iter().all(|&s| s > 0) => quadratic_form(&g, w, &part).unwrap(),
                    _ => w.w_c * (64.0 - 8.0) + w.w_r * 2.0 * g.total_weight(),
                }
            })
            .collect();
        let best = Labeling::new(decode(smallest_argmax(&forms) as u64, 8), 2).unwrap().canonical();
        assert_eq!(best, exhaustive_mle(&g, &params).unwrap(), "trial {trial}");
    }
}

#[test]
fn likelihood_and_form_differ_by_a_labeling_free_constant() {
    let g = random_simple_graph(9, 0.4, 3);
    let params = ModelParams::new(0.3, 0.2, 0.15);
    let w = params.weights();
    let offsets: Vec<f64> = (1..40)
        .map(|s| {
            let part = random_bipartition(9, s);
            4.0 * log_likelihood(&g, &part, &params).unwrap() - quadratic_form(&g, w, &part).unwrap()
        })
        .collect();
    for o in &offsets {
        assert!((o - offsets[0]).abs() < 1e-9 * offsets[0].abs().max(1.0));
    }
}

#[test]
fn estimates_from_planted_labels_concentrate() {
    let params = DsbmParams::two(1000, 1000, 0.01, 0.01, 0.1).unwrap();
    for seed in 0..20 {
        let (g, truth) = sample_dsbm2(&params, seed).unwrap();
        let est = estimate_params(&g, &truth).unwrap();
        for (got, want) in [(est.p, 0.01), (est.q, 0.01), (est.eta, 0.1)] {
            assert!((got - want).abs() <= 0.1 * want, "seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn mean_edge_count_matches_binomial() {
    let params = DsbmParams::two(1000, 1000, 0.01, 0.01, 0.1).unwrap();
    let counts: Vec<f64> = (0..50).map(|s| sample_dsbm2(&params, s).unwrap().0.edge_count() as f64).collect();
    let pairs: f64 = 2000.0 * 1999.0 / 2.0;
    let sd_of_mean = (pairs * 0.01 * 0.99 / 50.0).sqrt();
    assert!((common::mean(&counts) - 0.01 * pairs).abs() <= 3.0 * sd_of_mean);
}

#[test]
fn unoriented_meta_pairs_are_balanced() {
    let params = DsbmParams::new(vec![60, 60, 60], 0.1, 0.1, 0.0).unwrap();
    let meta = MetaGraph::new(3, vec![]).unwrap();
    let (mut forward, mut total) = (0.0f64, 0.0f64);
    for seed in 0..50 {
        let (g, labels) = sample_dsbm_meta(&params, &meta, seed).unwrap();
        for (u, v, _) in g.edges() {
            let (a, b) = (labels.get(u), labels.get(v));
            if a != b {
                total += 1.0;
                if a < b {
                    forward += 1.0;
                }
            }
        }
    }
    assert!((forward - total / 2.0).abs() <= 4.0 * (total / 4.0f64).sqrt());
}

#[test]
fn three_block_path_sample_has_every_vertex() {
    let params = DsbmParams::new(vec![1000; 3], 0.01, 0.01, 0.1).unwrap();
    let (g, labels) = sample_dsbm_meta(&params, &MetaGraph::path(3), 1).unwrap();
    assert_eq!(g.n(), 3000);
    assert_eq!(labels.sizes(), vec![1000; 3]);
}

#[test]
fn clamping_floor_scales_with_size() {
    assert_eq!(probability_floor(1), 0.5);
    assert_eq!(probability_floor(10), 1.0 / 90.0);
    let w = ModelParams::new(0.0, 1.0, 0.0).clamped(10).weights();
    assert!(w.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_matches_dense_definition(g in graph_strategy(40), wr in -3.0f64..3.0, wi in -3.0f64..3.0, wc in -1.0f64..1.0) {
        let n = g.n();
        let w = lesc::MleWeights::new(wr, wi, wc);
        let dense = DenseHermitian::from_operator(&build_operator(&g, w)).unwrap();
        for u in 0..n {
            for v in 0..n {
                let (a, b) = (g.weight(u, v), g.weight(v, u));
                let ones = if u == v { 0.0 } else { wc };
                let want = num_complex::Complex64::new(wr * (a + b) + ones, wi * (a - b));
                prop_assert!((dense.matrix()[(u, v)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn form_identity_holds(g in graph_strategy(30), seed in any::<u64>(), wr in -3.0f64..3.0, wi in -3.0f64..3.0, wc in -1.0f64..1.0) {
        let part = random_bipartition(g.n(), seed);
        let w = lesc::MleWeights::new(wr, wi, wc);
        let via_operator = quadratic_form(&g, w, &part).unwrap();
        let via_flows = flow_objective(&g, w, &part).unwrap();
        prop_assert!((via_operator - via_flows).abs() <= 1e-9 * via_flows.abs().max(1.0));
    }

    #[test]
    fn samples_never_contain_reciprocal_pairs(n1 in 1usize..30, n2 in 1usize..30, p in 0.0f64..=1.0, q in 0.0f64..=1.0, eta in 0.0f64..=0.5, seed in any::<u64>()) {
        let (g, _) = sample_dsbm2(&DsbmParams::two(n1, n2, p, q, eta).unwrap(), seed).unwrap();
        prop_assert!(g.find_reciprocal_pair().is_none());
        let again = sample_dsbm2(&DsbmParams::two(n1, n2, p, q, eta).unwrap(), seed).unwrap().0;
        prop_assert_eq!(g, again);
    }

    #[test]
    fn weights_are_finite_after_clamping(p in -1.0f64..2.0, q in -1.0f64..2.0, eta in -1.0f64..1.0, n in 2usize..5000) {
        let w = ModelParams::new(p, q, eta).clamped(n).weights();
        prop_assert!(w.is_finite());
        prop_assert!(w.w_i >= 0.0);
    }
}

#[test]
fn reversed_graph_swaps_flow_roles() {
    let g: DirectedGraph = random_simple_graph(20, 0.3, 9);
    let part = random_bipartition(20, 2);
    let w = mle_weights(0.2, 0.1, 0.2);
    let forward = flow_objective(&g, w, &part).unwrap();
    let backward = flow_objective(&g.reversed(), w, &part.swapped()).unwrap();
    assert!((forward - backward).abs() < 1e-9);
}
