//! Replicated parameter sweeps.
//!
//! The grid is the product of the `p`, `q` and `eta` lists. Replicate `r` of
//! grid point `i` samples its graph with seed
//! `derive_seed(derive_seed(seed, GRAPH, i), GRAPH, r)` and runs every method
//! with seed `derive_seed(seed, SPLIT, r)`, so results do not depend on the
//! thread count. Replicates run in parallel; rows come out in
//! (point, replicate, method) order.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lesc::rng::{derive_seed, stage};
use lesc::{
    ari, baseline_cluster, lesc_bipartition, lesc_k, misclustering_error, sample_dsbm_meta, shuffle_vertices,
    BaselineConfig, DsbmParams, EigenConfig, KmeansConfig, LescConfig, LescInit, MetaGraph,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{parse_method, CliError, CliResult, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitName {
    RandomParams,
    FlowMatrix,
    TotalFlow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LescSettings {
    pub max_outer_iter: usize,
    pub init: InitName,
}

impl Default for LescSettings {
    fn default() -> Self {
        Self {
            max_outer_iter: 20,
            init: InitName::FlowMatrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    /// Community sizes; community 0 first.
    pub sizes: Vec<usize>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub eta: Vec<f64>,
    /// Required for more than two communities; two communities default to
    /// a single source-to-sink pair.
    #[serde(default)]
    pub meta: Option<MetaGraph>,
    pub methods: Vec<String>,
    /// Clusters to recover; defaults to the number of communities.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Randomly relabel vertices of every sample.
    #[serde(default)]
    pub shuffle: bool,
    pub output: PathBuf,
    /// Defaults to the output path with an `.aggregate.csv` suffix.
    #[serde(default)]
    pub aggregate_output: Option<PathBuf>,
    #[serde(default)]
    pub lesc: LescSettings,
    #[serde(default)]
    pub eigen: EigenConfig,
    #[serde(default)]
    pub kmeans: KmeansConfig,
}

fn one() -> usize {
    1
}

impl BenchmarkConfig {
    pub fn aggregate_path(&self) -> PathBuf {
        self.aggregate_output.clone().unwrap_or_else(|| {
            let stem = self.output.with_extension("");
            PathBuf::from(format!("{}.aggregate.csv", stem.display()))
        })
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(self.sizes.len())
    }

    /// Grid points in `p`-major, then `q`, then `eta` order.
    pub fn grid(&self) -> Vec<(f64, f64, f64)> {
        let mut points = Vec::new();
        for &p in &self.p {
            for &q in &self.q {
                for &eta in &self.eta {
                    points.push((p, q, eta));
                }
            }
        }
        points
    }

    pub fn meta_graph(&self) -> CliResult<MetaGraph> {
        match (&self.meta, self.sizes.len()) {
            (Some(m), _) => Ok(m.clone()),
            (None, 2) => Ok(MetaGraph::source_sink()),
            (None, k) => Err(CliError::Usage(format!("{k} communities need an explicit meta-graph"))),
        }
    }

    pub fn validate(&self) -> CliResult<Vec<Method>> {
        if self.replicates == 0 {
            return Err(CliError::Usage("replicates must be at least 1".into()));
        }
        if self.p.is_empty() || self.q.is_empty() || self.eta.is_empty() {
            return Err(CliError::Usage("p, q and eta grids must be nonempty".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Usage("methods list is empty".into()));
        }
        if self.k() < 2 {
            return Err(CliError::Usage("k must be at least 2".into()));
        }
        for (p, q, eta) in self.grid() {
            DsbmParams::new(self.sizes.clone(), p, q, eta)?;
        }
        self.meta_graph()?;
        self.eigen.validate()?;
        self.kmeans.validate()?;
        self.methods.iter().map(|m| parse_method(m)).collect()
    }

    fn lesc_config(&self, seed: u64) -> LescConfig {
        LescConfig {
            max_outer_iter: self.lesc.max_outer_iter,
            init: match self.lesc.init {
                InitName::RandomParams => LescInit::RandomParams,
                InitName::FlowMatrix => LescInit::FlowMatrix,
                InitName::TotalFlow => LescInit::TotalFlow,
            },
            eigen: self.eigen,
            kmeans: self.kmeans,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub point: usize,
    pub p: f64,
    pub q: f64,
    pub eta: f64,
    pub replicate: usize,
    pub method: String,
    pub graph_seed: u64,
    pub method_seed: u64,
    pub n: usize,
    pub edges: usize,
    /// `ok` or the error message.
    pub status: String,
    pub ari: Option<f64>,
    pub error_rate: Option<f64>,
    /// Outer rounds of a two-way LE-SC run.
    pub outer_iterations: Option<usize>,
    /// Power iterations summed over rounds of a two-way LE-SC run.
    pub eigen_iterations: Option<usize>,
    pub runtime_secs: f64,
    pub eigen_secs: Option<f64>,
    pub kmeans_secs: Option<f64>,
    pub update_secs: Option<f64>,
    /// `eigen_secs / eigen_iterations`: time of one operator application
    /// plus the vector updates of one power step.
    pub matvec_secs: Option<f64>,
}

/// Columns excluded from reproducibility comparisons.
pub const TIMING_COLUMNS: [&str; 6] = [
    "runtime_secs",
    "eigen_secs",
    "kmeans_secs",
    "update_secs",
    "matvec_secs",
    "mean_runtime_secs",
];

struct MethodOutcome {
    labels: lesc::Labeling,
    outer_iterations: Option<usize>,
    eigen_iterations: Option<usize>,
    eigen_secs: Option<f64>,
    kmeans_secs: Option<f64>,
    update_secs: Option<f64>,
}

fn run_method(
    method: Method,
    graph: &lesc::DirectedGraph,
    k: usize,
    config: &BenchmarkConfig,
    seed: u64,
) -> lesc::Result<MethodOutcome> {
    let plain = |labels| MethodOutcome {
        labels,
        outer_iterations: None,
        eigen_iterations: None,
        eigen_secs: None,
        kmeans_secs: None,
        update_secs: None,
    };
    match method {
        Method::Lesc if k == 2 => {
            let r = lesc_bipartition(graph, &config.lesc_config(seed))?;
            Ok(MethodOutcome {
                outer_iterations: Some(r.trace.len()),
                eigen_iterations: Some(r.trace.eigen_iterations()),
                eigen_secs: Some(r.trace.eigen_secs()),
                kmeans_secs: Some(r.trace.kmeans_secs()),
                update_secs: Some(r.trace.update_secs()),
                labels: r.labels,
            })
        }
        Method::Lesc => Ok(plain(lesc_k(graph, k, &config.lesc_config(seed))?)),
        Method::Baseline(m) => {
            let cfg = BaselineConfig {
                eigen: config.eigen,
                kmeans: config.kmeans,
                seed,
            };
            Ok(plain(baseline_cluster(graph, m, k, &cfg)?))
        }
    }
}

/// Runs every (grid point, replicate, method) combination.
pub fn run_benchmark(config: &BenchmarkConfig) -> CliResult<Vec<BenchmarkRow>> {
    let methods = config.validate()?;
    let meta = config.meta_graph()?;
    let grid = config.grid();
    let k = config.k();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|i| (0..config.replicates).map(move |r| (i, r)))
        .collect();
    let results: Vec<CliResult<Vec<BenchmarkRow>>> = jobs
        .par_iter()
        .map(|&(point, replicate)| {
            let (p, q, eta) = grid[point];
            let graph_seed = derive_seed(derive_seed(config.seed, stage::GRAPH, point as u64), stage::GRAPH, replicate as u64);
            let method_seed = derive_seed(config.seed, stage::SPLIT, replicate as u64);
            let params = DsbmParams::new(config.sizes.clone(), p, q, eta)?;
            let (graph, truth) = sample_dsbm_meta(&params, &meta, graph_seed)?;
            let (graph, truth) = if config.shuffle {
                shuffle_vertices(&graph, &truth, graph_seed)?
            } else {
                (graph, truth)
            };
            let rows = methods
                .iter()
                .map(|&method| {
                    let started = Instant::now();
                    let outcome = run_method(method, &graph, k, config, method_seed);
                    let runtime_secs = started.elapsed().as_secs_f64();
                    let mut row = BenchmarkRow {
                        point,
                        p,
                        q,
                        eta,
                        replicate,
                        method: method.name().to_string(),
                        graph_seed,
                        method_seed,
                        n: graph.n(),
                        edges: graph.edge_count(),
                        status: "ok".into(),
                        ari: None,
                        error_rate: None,
                        outer_iterations: None,
                        eigen_iterations: None,
                        runtime_secs,
                        eigen_secs: None,
                        kmeans_secs: None,
                        update_secs: None,
                        matvec_secs: None,
                    };
                    let scored = outcome.and_then(|o| {
                        let a = ari(&truth, &o.labels)?;
                        let e = misclustering_error(&truth, &o.labels)?;
                        Ok((o, a, e))
                    });
                    match scored {
                        Ok((o, a, e)) => {
                            row.ari = Some(a);
                            row.error_rate = Some(e as f64 / graph.n() as f64);
                            row.outer_iterations = o.outer_iterations;
                            row.eigen_iterations = o.eigen_iterations;
                            row.eigen_secs = o.eigen_secs;
                            row.kmeans_secs = o.kmeans_secs;
                            row.update_secs = o.update_secs;
                            row.matvec_secs = match (o.eigen_secs, o.eigen_iterations) {
                                (Some(s), Some(it)) if it > 0 => Some(s / it as f64),
                                _ => None,
                            };
                        }
                        Err(err) => row.status = err.to_string(),
                    }
                    row
                })
                .collect();
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub point: usize,
    pub p: f64,
    pub q: f64,
    pub eta: f64,
    pub method: String,
    /// Successful replicates.
    pub replicates: usize,
    pub failures: usize,
    pub mean_ari: Option<f64>,
    pub sd_ari: Option<f64>,
    pub mean_error_rate: Option<f64>,
    pub mean_matvec_secs: Option<f64>,
    pub mean_runtime_secs: f64,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Per-(point, method) means in first-appearance order.
pub fn aggregate(rows: &[BenchmarkRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, String)> = Vec::new();
    for r in rows {
        let key = (r.point, r.method.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(point, method)| {
            let group: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.point == point && r.method == method).collect();
            let ok: Vec<&&BenchmarkRow> = group.iter().filter(|r| r.status == "ok").collect();
            let aris: Vec<f64> = ok.iter().filter_map(|r| r.ari).collect();
            let errors: Vec<f64> = ok.iter().filter_map(|r| r.error_rate).collect();
            let matvec: Vec<f64> = ok.iter().filter_map(|r| r.matvec_secs).collect();
            let runtimes: Vec<f64> = group.iter().map(|r| r.runtime_secs).collect();
            let mean_ari = mean(&aris);
            let sd_ari = mean_ari.filter(|_| aris.len() > 1).map(|m| {
                (aris.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (aris.len() - 1) as f64).sqrt()
            });
            AggregateRow {
                point,
                p: group[0].p,
                q: group[0].q,
                eta: group[0].eta,
                method,
                replicates: ok.len(),
                failures: group.len() - ok.len(),
                mean_ari,
                sd_ari,
                mean_error_rate: mean(&errors),
                mean_matvec_secs: mean(&matvec),
                mean_runtime_secs: mean(&runtimes).unwrap_or(0.0),
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results(path: &Path, rows: &[BenchmarkRow]) -> CliResult<()> {
    write_csv(path, rows)
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> CliResult<()> {
    write_csv(path, rows)
}
