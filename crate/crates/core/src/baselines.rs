//! Fixed-operator spectral baselines.
//!
//! Each method splits recursively like [`lesc_k`](crate::cluster::lesc_k),
//! but every split uses the same operator family with no parameter
//! learning, followed by 2-means in the plane.
//!
//! | method   | operator           |
//! |----------|--------------------|
//! | `Sym`    | `A + A^T`          |
//! | `BibSym` | `A A^T + A^T A`    |
//! | `Herm`   | `i (A - A^T)`      |
//!
//! `Herm` embeds its top eigenvector as `(Re v_u, Im v_u)`. The real
//! operators are entrywise nonnegative, so their top eigenvector is the
//! Perron vector, which carries no block signal when blocks are balanced.
//! They embed as `(v1_u, v2_u)` from the two leading eigenvectors, each
//! rotated to be real.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cluster::{embed, recursive_bipartition, split_seed};
use crate::eigen::{deflated_eigenpair, top_eigenpair, EigenConfig};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Labeling};
use crate::kmeans::{kmeans_plane, KmeansConfig, Point};
use crate::mle::{build_operator, MleWeights};
use crate::operator::HermitianOp;
use crate::rng::{derive_seed, stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Sym,
    BibSym,
    Herm,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 3] = [Self::Sym, Self::BibSym, Self::Herm];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sym => "sym",
            Self::BibSym => "bibsym",
            Self::Herm => "herm",
        }
    }

    fn is_real(&self) -> bool {
        !matches!(self, Self::Herm)
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::BadParams(format!("unknown baseline `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub eigen: EigenConfig,
    pub kmeans: KmeansConfig,
    pub seed: u64,
}

/// `A A^T + A^T A` applied as two chained sparse products per term.
pub struct Bibliometric<'g> {
    g: &'g DirectedGraph,
    row_bound: f64,
}

impl<'g> Bibliometric<'g> {
    pub fn new(g: &'g DirectedGraph) -> Self {
        // entries are nonnegative, so the row sums are exact
        let row_bound = (0..g.n())
            .map(|u| {
                let co_cited: f64 = g.out_edges(u).map(|(w, a)| a * g.in_degree(w)).sum();
                let co_citing: f64 = g.in_edges(u).map(|(w, a)| a * g.out_degree(w)).sum();
                co_cited + co_citing
            })
            .fold(0.0, f64::max);
        Self { g, row_bound }
    }
}

impl HermitianOp for Bibliometric<'_> {
    fn dim(&self) -> usize {
        self.g.n()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.g.n();
        let zero = Complex64::new(0.0, 0.0);
        let mut ax = vec![zero; n];
        let mut atx = vec![zero; n];
        for u in 0..n {
            ax[u] = self.g.out_edges(u).map(|(v, w)| w * x[v]).sum();
            atx[u] = self.g.in_edges(u).map(|(v, w)| w * x[v]).sum();
        }
        for (u, out) in y.iter_mut().enumerate() {
            let a_atx: Complex64 = self.g.out_edges(u).map(|(v, w)| w * atx[v]).sum();
            let at_ax: Complex64 = self.g.in_edges(u).map(|(v, w)| w * ax[v]).sum();
            *out = a_atx + at_ax;
        }
    }

    fn row_abs_bound(&self) -> f64 {
        self.row_bound
    }
}

/// Removes the global phase of an eigenvector of a real operator so that
/// its largest-modulus entry is real positive, then keeps the real parts.
pub fn real_part_aligned(v: &[Complex64]) -> Vec<f64> {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .filter(|z| z.norm() > 0.0);
    let phase = pivot.map_or(Complex64::new(1.0, 0.0), |z| z.conj() / z.norm());
    v.iter().map(|z| (z * phase).re).collect()
}

/// Plane embedding `(v1_u, v2_u)` of the two leading eigenvectors of a
/// real operator.
pub fn real_embedding(first: &[Complex64], second: &[Complex64]) -> Vec<Point> {
    real_part_aligned(first)
        .into_iter()
        .zip(real_part_aligned(second))
        .map(|(x, y)| [x, y])
        .collect()
}

fn spectral_points(op: &dyn HermitianOp, real: bool, cfg: &BaselineConfig, seed: u64) -> Result<Vec<Point>> {
    let eigen_cfg = |j| EigenConfig {
        seed: derive_seed(seed, stage::EIGEN, j),
        ..cfg.eigen
    };
    let top = top_eigenpair(op, &eigen_cfg(0))?;
    if !real {
        return Ok(embed(&top.vector));
    }
    if op.dim() < 2 {
        return Ok(real_embedding(&top.vector, &top.vector));
    }
    let next = deflated_eigenpair(op, &eigen_cfg(1), std::slice::from_ref(&top.vector))?;
    Ok(real_embedding(&top.vector, &next.vector))
}

fn bipartition(g: &DirectedGraph, method: BaselineMethod, cfg: &BaselineConfig, seed: u64) -> Result<Labeling> {
    let real = method.is_real();
    let points = match method {
        BaselineMethod::Sym => spectral_points(&build_operator(g, MleWeights::new(1.0, 0.0, 0.0)), real, cfg, seed)?,
        BaselineMethod::Herm => spectral_points(&build_operator(g, MleWeights::new(0.0, 1.0, 0.0)), real, cfg, seed)?,
        BaselineMethod::BibSym => spectral_points(&Bibliometric::new(g), real, cfg, seed)?,
    };
    let km_cfg = KmeansConfig {
        seed: derive_seed(seed, stage::KMEANS, 0),
        ..cfg.kmeans
    };
    Ok(kmeans_plane(&points, 2, &km_cfg)?.labels.canonical())
}

/// Partitions `g` into `k` clusters with a fixed-operator baseline.
pub fn baseline_cluster(
    g: &DirectedGraph,
    method: BaselineMethod,
    k: usize,
    cfg: &BaselineConfig,
) -> Result<Labeling> {
    cfg.eigen.validate()?;
    cfg.kmeans.validate()?;
    recursive_bipartition(g, k, |sub, j| bipartition(sub, method, cfg, split_seed(cfg.seed, j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{inner, DenseHermitian};

    fn random_graph(n: usize, seed: u64) -> DirectedGraph {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.random::<f64>() < 0.15 {
                    edges.push((u, v, 1.0 + rng.random_range(0..3) as f64));
                }
            }
        }
        DirectedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn bibliometric_matches_dense_product() {
        let g = random_graph(12, 1);
        let n = g.n();
        let a = nalgebra::DMatrix::from_fn(n, n, |u, v| g.weight(u, v));
        let b = &a * a.transpose() + a.transpose() * &a;
        let op = Bibliometric::new(&g);
        let dense = DenseHermitian::from_operator(&op).unwrap();
        for u in 0..n {
            for v in 0..n {
                assert!((dense.matrix()[(u, v)] - Complex64::new(b[(u, v)], 0.0)).norm() < 1e-12);
            }
        }
        let bound = (0..n).map(|u| b.row(u).sum()).fold(0.0, f64::max);
        assert!((op.row_abs_bound() - bound).abs() < 1e-9);
    }

    #[test]
    fn baseline_operators_are_hermitian() {
        let g = random_graph(15, 2);
        let x: Vec<Complex64> = (0..15).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let y: Vec<Complex64> = (0..15).map(|i| Complex64::new((i as f64 * 1.7).cos(), -(i as f64).sin())).collect();
        let sym = build_operator(&g, MleWeights::new(1.0, 0.0, 0.0));
        let herm = build_operator(&g, MleWeights::new(0.0, 1.0, 0.0));
        let bib = Bibliometric::new(&g);
        let ops: [&dyn HermitianOp; 3] = [&sym, &bib, &herm];
        for op in ops {
            let lhs = inner(&x, &op.apply_vec(&y));
            let rhs = inner(&y, &op.apply_vec(&x)).conj();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn real_embedding_removes_phase() {
        let rot = Complex64::from_polar(1.0, 0.8);
        let v = [Complex64::new(0.6, 0.0) * rot, Complex64::new(-0.8, 0.0) * rot];
        let w = [Complex64::new(0.8, 0.0) * rot.conj(), Complex64::new(0.6, 0.0) * rot.conj()];
        let pts = real_embedding(&v, &w);
        assert!((pts[0][0] - -0.6).abs() < 1e-12 && (pts[1][0] - 0.8).abs() < 1e-12);
        assert!((pts[0][1] - 0.8).abs() < 1e-12 && (pts[1][1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn method_names_round_trip() {
        for m in BaselineMethod::ALL {
            assert_eq!(m.name().parse::<BaselineMethod>().unwrap(), m);
        }
        assert!("disim".parse::<BaselineMethod>().is_err());
    }

    #[test]
    fn too_small() {
        let g = DirectedGraph::new(2, []).unwrap();
        assert_eq!(
            baseline_cluster(&g, BaselineMethod::Sym, 3, &BaselineConfig::default()),
            Err(Error::GraphTooSmall { n: 2, min: 3 })
        );
    }
}
