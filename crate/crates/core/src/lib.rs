//! Spectral clustering of directed graphs by likelihood estimation.
//!
//! A directed graph with two planted communities is scored by a Hermitian
//! matrix whose quadratic form over `{1, i}` indicator vectors is the
//! log-likelihood of the directed stochastic block model. The crate
//! provides:
//!
//! - [`graph`]: compressed directed graphs, labelings and cut flows,
//! - [`dsbm`]: seeded samplers for two-block and meta-graph models,
//! - [`mle`]: likelihood weights, the matrix-free operator and an
//!   exhaustive maximum-likelihood oracle,
//! - [`eigen`]: shifted power iteration and a dense reference solver,
//! - [`kmeans`]: k-means++ in the plane,
//! - [`cluster`]: the alternating estimate-and-split algorithm and its
//!   recursive `k`-way extension,
//! - [`baselines`]: fixed-operator comparison methods,
//! - [`metrics`]: adjusted Rand index and misclustering error,
//! - [`theory`]: closed-form population diagnostics.
//!
//! ```
//! use lesc::{ari, lesc_bipartition, sample_dsbm2, DsbmParams, LescConfig};
//!
//! let params = DsbmParams::two(300, 300, 0.05, 0.05, 0.05)?;
//! let (graph, truth) = sample_dsbm2(&params, 11)?;
//! let result = lesc_bipartition(&graph, &LescConfig::default())?;
//! assert!(ari(&truth, &result.labels)? > 0.9);
//! # Ok::<(), lesc::Error>(())
//! ```

pub mod baselines;
pub mod cluster;
pub mod dsbm;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod io;
pub mod kmeans;
pub mod metrics;
pub mod mle;
pub mod operator;
pub mod rng;
pub mod theory;

pub use baselines::{baseline_cluster, BaselineConfig, BaselineMethod};
pub use cluster::{estimate_params, lesc_bipartition, lesc_k, LescConfig, LescInit, LescResult, LescTrace};
pub use dsbm::{sample_dsbm2, sample_dsbm_meta, shuffle_vertices, DsbmParams, MetaGraph};
pub use eigen::{dense_top_eigenpair, top_eigenpair, EigenConfig, EigenResult, EigenStatus, Selection};
pub use error::{Error, Result};
pub use graph::{cut_flows, net_flow, total_flow, CutFlows, DirectedGraph, Labeling};
pub use kmeans::{kmeans_plane, KmeansConfig, KmeansResult};
pub use metrics::{ari, misclustering_error};
pub use mle::{
    apply_operator, build_operator, exhaustive_mle, log_likelihood, mle_weights, quadratic_form, HermitianOperator,
    MleWeights, ModelParams,
};
pub use operator::{DenseHermitian, HermitianOp};
pub use theory::{centroid_distance, eigengap_delta, error_bound, l_eta, population_matrix, PopulationSummary};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/hermitian.md")]
    mod hermitian {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/lesc.md")]
    mod lesc {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
