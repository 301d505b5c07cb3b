//! Likelihood-estimation spectral clustering.
//!
//! [`lesc_bipartition`] alternates between a spectral step and a
//! method-of-moments step:
//!
//! 1. build the likelihood operator for the current weights,
//! 2. take its largest-signed eigenvector,
//! 3. split the vertices with 2-means on `(Re v_u, Im v_u)`,
//! 4. re-estimate `(p, q, eta)` from the split and recompute the weights.
//!
//! The loop ends after `max_outer_iter` rounds or as soon as a round
//! reproduces the previous partition. [`lesc_k`] reaches `k` clusters by
//! repeatedly bipartitioning the largest cluster.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::{top_eigenpair, EigenConfig, EigenStatus};
use crate::error::{Error, Result};
use crate::graph::{cut_flows, DirectedGraph, Labeling};
use crate::kmeans::{kmeans_plane, KmeansConfig, Point};
use crate::mle::{probability_floor, FlowPattern, HermitianOperator, MleWeights, ModelParams, ETA_MIN};
use crate::rng::{derive_seed, rng_from_seed, stage};

/// Moment estimates of `(p, q, eta)` from a bipartition, clamped for `g.n()`.
///
/// `p` is the within-cluster edge density, `q` the cross density and `eta`
/// the minority share of cross edges; `eta = 0.5` when no edge crosses.
/// Weighted graphs give weight densities.
pub fn estimate_params(g: &DirectedGraph, part: &Labeling) -> Result<ModelParams> {
    let flows = cut_flows(g, part)?;
    let sizes = part.sizes();
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(empty));
    }
    let (n1, n2) = (sizes[0] as f64, sizes[1] as f64);
    let tf = flows.total();
    let intra_pairs = n1 * (n1 - 1.0) / 2.0 + n2 * (n2 - 1.0) / 2.0;
    let p = if intra_pairs > 0.0 {
        (g.total_weight() - tf) / intra_pairs
    } else {
        0.0
    };
    let q = tf / (n1 * n2);
    let eta = if tf > 0.0 {
        flows.forward.min(flows.backward) / tf
    } else {
        0.5
    };
    Ok(ModelParams::new(p, q, eta).clamped(g.n()))
}

/// How the first operator is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum LescInit {
    /// `(p, q, eta)` uniform over the clamped ranges.
    RandomParams,
    /// `(A + A^T) + i (A - A^T)`.
    FlowMatrix,
    /// `A + A^T`.
    TotalFlow,
    /// Parameters estimated from a given bipartition.
    WarmLabels(Labeling),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LescConfig {
    pub max_outer_iter: usize,
    pub init: LescInit,
    /// Solver settings; the seed is replaced by one derived from `seed`.
    pub eigen: EigenConfig,
    /// k-means settings; the seed is replaced by one derived from `seed`.
    pub kmeans: KmeansConfig,
    pub seed: u64,
}

impl Default for LescConfig {
    fn default() -> Self {
        Self {
            max_outer_iter: 20,
            init: LescInit::FlowMatrix,
            eigen: EigenConfig::default(),
            kmeans: KmeansConfig::default(),
            seed: 0,
        }
    }
}

impl LescConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iter == 0 {
            return Err(Error::BadParams("max_outer_iter must be at least 1".into()));
        }
        self.eigen.validate()?;
        self.kmeans.validate()
    }
}

/// One outer round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Weights of the operator built in this round.
    pub weights: MleWeights,
    /// Estimate from this round's partition; it sets the next round's weights.
    pub params: ModelParams,
    pub eigenvalue: f64,
    pub eigen_status: EigenStatus,
    pub eigen_iterations: usize,
    pub kmeans_cost: f64,
    /// Vertices that changed side, up to swapping the two sides. `None` in
    /// the first round unless warm labels were given.
    pub label_changes: Option<usize>,
    /// Source-side share of cross flow minus one half; its sign says which
    /// side the round's orientation treats as the source.
    pub source_bias: f64,
    pub eigen_secs: f64,
    pub kmeans_secs: f64,
    pub update_secs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LescTrace {
    pub records: Vec<IterationRecord>,
}

impl LescTrace {
    pub const CSV_HEADER: &'static str = "iteration,p,q,eta,w_r,w_i,w_c,eigenvalue,eigen_status,eigen_iterations,kmeans_cost,label_changes,source_bias,eigen_secs,kmeans_secs,update_secs";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Total power iterations over all rounds.
    pub fn eigen_iterations(&self) -> usize {
        self.records.iter().map(|r| r.eigen_iterations).sum()
    }

    pub fn eigen_secs(&self) -> f64 {
        self.records.iter().map(|r| r.eigen_secs).sum()
    }

    pub fn kmeans_secs(&self) -> f64 {
        self.records.iter().map(|r| r.kmeans_secs).sum()
    }

    pub fn update_secs(&self) -> f64 {
        self.records.iter().map(|r| r.update_secs).sum()
    }

    /// True if any round's eigensolve stopped at the iteration cap.
    pub fn any_unconverged(&self) -> bool {
        self.records
            .iter()
            .any(|r| r.eigen_status == EigenStatus::NoConvergence)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            let changes = r.label_changes.map_or(String::new(), |c| c.to_string());
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
                r.iteration,
                r.params.p,
                r.params.q,
                r.params.eta,
                r.weights.w_r,
                r.weights.w_i,
                r.weights.w_c,
                r.eigenvalue,
                r.eigen_status.as_str(),
                r.eigen_iterations,
                r.kmeans_cost,
                changes,
                r.source_bias,
                r.eigen_secs,
                r.kmeans_secs,
                r.update_secs,
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LescResult {
    /// Community 0 is the side sending more cross flow.
    pub labels: Labeling,
    pub params: ModelParams,
    pub trace: LescTrace,
}

/// Planar embedding of a complex vector.
pub fn embed(v: &[Complex64]) -> Vec<Point> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Size of the symmetric difference of two bipartitions, minimized over swapping.
pub fn bipartition_changes(a: &Labeling, b: &Labeling) -> usize {
    let diff = a
        .assignments()
        .iter()
        .zip(b.assignments())
        .filter(|(x, y)| x != y)
        .count();
    diff.min(a.len() - diff)
}

/// Relabels so that community 0 sends at least as much cross flow as it
/// receives; exact ties keep vertex 0 in community 0.
pub fn orient_source_first(g: &DirectedGraph, part: &Labeling) -> Result<Labeling> {
    let part = part.canonical();
    let flows = cut_flows(g, &part)?;
    Ok(if flows.backward > flows.forward {
        part.swapped()
    } else {
        part
    })
}

fn initial_weights(g: &DirectedGraph, cfg: &LescConfig) -> Result<MleWeights> {
    Ok(match &cfg.init {
        LescInit::FlowMatrix => MleWeights::new(1.0, 1.0, 0.0),
        LescInit::TotalFlow => MleWeights::new(1.0, 0.0, 0.0),
        LescInit::RandomParams => {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, stage::INIT, 0));
            let floor = probability_floor(g.n());
            let p = rng.random_range(floor..=1.0 - floor);
            let q = rng.random_range(floor..=1.0 - floor);
            let eta = rng.random_range(ETA_MIN..=0.5);
            ModelParams::new(p, q, eta).weights()
        }
        LescInit::WarmLabels(labels) => {
            labels.check_bipartition(g.n())?;
            estimate_params(g, labels)?.weights()
        }
    })
}

/// Spectral bipartition with alternating parameter estimation.
pub fn lesc_bipartition(g: &DirectedGraph, cfg: &LescConfig) -> Result<LescResult> {
    cfg.validate()?;
    let n = g.n();
    if n < 2 {
        return Err(Error::GraphTooSmall { n, min: 2 });
    }
    let pattern = Arc::new(FlowPattern::new(g));
    let mut weights = initial_weights(g, cfg)?;
    let mut previous = match &cfg.init {
        LescInit::WarmLabels(labels) => Some(labels.clone()),
        _ => None,
    };
    let mut trace = LescTrace::default();
    let mut current: Option<(Labeling, ModelParams)> = None;
    for iteration in 0..cfg.max_outer_iter {
        if weights.w_r < 0.0 {
            log::debug!("round {iteration}: negative symmetric weight w_r = {}", weights.w_r);
        }
        let started = Instant::now();
        let op = HermitianOperator::new(Arc::clone(&pattern), weights);
        let eigen_cfg = EigenConfig {
            seed: derive_seed(cfg.seed, stage::EIGEN, iteration as u64),
            ..cfg.eigen
        };
        let eig = top_eigenpair(&op, &eigen_cfg)?;
        let eigen_secs = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let km_cfg = KmeansConfig {
            seed: derive_seed(cfg.seed, stage::KMEANS, iteration as u64),
            ..cfg.kmeans
        };
        let km = kmeans_plane(&embed(&eig.vector), 2, &km_cfg)?;
        let kmeans_secs = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let labels = km.labels;
        let params = estimate_params(g, &labels)?;
        let flows = cut_flows(g, &labels)?;
        let source_bias = if flows.total() > 0.0 {
            flows.forward / flows.total() - 0.5
        } else {
            0.0
        };
        let update_secs = started.elapsed().as_secs_f64();

        let label_changes = previous.as_ref().map(|prev| bipartition_changes(prev, &labels));
        trace.records.push(IterationRecord {
            iteration,
            weights,
            params,
            eigenvalue: eig.value,
            eigen_status: eig.status,
            eigen_iterations: eig.iterations,
            kmeans_cost: km.cost,
            label_changes,
            source_bias,
            eigen_secs,
            kmeans_secs,
            update_secs,
        });
        weights = params.weights();
        previous = Some(labels.clone());
        current = Some((labels, params));
        if label_changes == Some(0) {
            break;
        }
    }
    let (labels, params) = current.expect("max_outer_iter >= 1");
    Ok(LescResult {
        labels: orient_source_first(g, &labels)?,
        params,
        trace,
    })
}

/// Seed of split `j` in a recursive partition: the master seed itself for
/// the first split, so that `k = 2` is a single plain bipartition.
pub fn split_seed(master: u64, split: usize) -> u64 {
    if split == 0 {
        master
    } else {
        derive_seed(master, stage::SPLIT, split as u64)
    }
}

/// Grows a partition to `k` clusters by repeatedly splitting the largest
/// one (smallest member id among equal sizes). `split(sub, j)` bipartitions
/// the induced subgraph `sub` for the `j`-th split. Final labels follow
/// cluster creation order: a split cluster is removed and its two halves
/// are appended.
pub fn recursive_bipartition<F>(g: &DirectedGraph, k: usize, mut split: F) -> Result<Labeling>
where
    F: FnMut(&DirectedGraph, usize) -> Result<Labeling>,
{
    let n = g.n();
    if k < 2 {
        return Err(Error::BadParams(format!("need k >= 2 clusters, got {k}")));
    }
    if n < k {
        return Err(Error::GraphTooSmall { n, min: k });
    }
    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut j = 0;
    while clusters.len() < k {
        let target = (0..clusters.len())
            .max_by(|&a, &b| {
                clusters[a]
                    .len()
                    .cmp(&clusters[b].len())
                    .then(clusters[b][0].cmp(&clusters[a][0]))
            })
            .expect("at least one cluster");
        if clusters[target].len() < 2 {
            return Err(Error::UnsplittableCluster(clusters[target][0]));
        }
        let members = clusters.remove(target);
        let sub = g.induced_subgraph(&members)?;
        let halves = split(&sub, j)?;
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for (&v, &side) in members.iter().zip(halves.assignments()) {
            if side == 0 {
                first.push(v);
            } else {
                second.push(v);
            }
        }
        if first.is_empty() || second.is_empty() {
            return Err(Error::UnsplittableCluster(members[0]));
        }
        clusters.push(first);
        clusters.push(second);
        j += 1;
    }
    let mut assignments = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &v in members {
            assignments[v] = c;
        }
    }
    Labeling::new(assignments, k)
}

/// LE-SC with `k` clusters by recursive bipartition.
///
/// Split `j > 0` runs with seed `split_seed(cfg.seed, j)`; warm labels only
/// apply to the first split and later splits start from the flow matrix.
pub fn lesc_k(g: &DirectedGraph, k: usize, cfg: &LescConfig) -> Result<Labeling> {
    cfg.validate()?;
    recursive_bipartition(g, k, |sub, j| {
        let mut split_cfg = cfg.clone();
        split_cfg.seed = split_seed(cfg.seed, j);
        if j > 0 && matches!(split_cfg.init, LescInit::WarmLabels(_)) {
            split_cfg.init = LescInit::FlowMatrix;
        }
        Ok(lesc_bipartition(sub, &split_cfg)?.labels)
    })
}
