//! The Hermitian maximum-likelihood matrix of the two-community DSBM.
//!
//! For model parameters `(p, q, eta)` the log-likelihood of a bipartition is,
//! up to a factor 4 and an additive constant, the quadratic form `x* H x`
//! with `x_u = i` on community 0 (the source) and `x_u = 1` on community 1,
//! where
//!
//! ```text
//! H = w_r (A + A^T) + i w_i (A - A^T) + w_c (J - I)
//! w_i = log((1 - eta) / eta)
//! w_r = log(p^2 (1 - q)^2 / (4 eta (1 - eta) q^2 (1 - p)^2))
//! w_c = 2 log((1 - p) / (1 - q))
//! ```
//!
//! [`HermitianOperator`] applies `H` in `O(|E| + N)` by keeping the sparse
//! part in compressed rows and handling `J - I` as a rank-one update plus a
//! diagonal shift.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cut_flows, DirectedGraph, Labeling};
use crate::operator::HermitianOp;

/// Smallest direction-noise value used in any logarithm.
pub const ETA_MIN: f64 = 1e-4;

/// Edge-probability floor `1 / (N (N - 1))`: one expected edge over all ordered pairs.
pub fn probability_floor(n: usize) -> f64 {
    let pairs = (n as f64) * (n as f64 - 1.0);
    1.0 / pairs.max(2.0)
}

/// DSBM edge and orientation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: f64,
    pub q: f64,
    pub eta: f64,
}

impl ModelParams {
    pub fn new(p: f64, q: f64, eta: f64) -> Self {
        Self { p, q, eta }
    }

    /// Clamps `p, q` into `[floor, 1 - floor]` and `eta` into `[ETA_MIN, 0.5]`
    /// for a graph with `n` vertices, so every weight is finite.
    pub fn clamped(&self, n: usize) -> Self {
        let floor = probability_floor(n);
        let clamp_prob = |x: f64| {
            if x.is_nan() {
                floor
            } else {
                x.clamp(floor, 1.0 - floor)
            }
        };
        let eta = if self.eta.is_nan() {
            0.5
        } else {
            self.eta.clamp(ETA_MIN, 0.5)
        };
        Self {
            p: clamp_prob(self.p),
            q: clamp_prob(self.q),
            eta,
        }
    }

    pub fn weights(&self) -> MleWeights {
        mle_weights(self.p, self.q, self.eta)
    }
}

/// The coefficients `(w_r, w_i, w_c)` of the Hermitian likelihood matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleWeights {
    /// Weight on the symmetric part `A + A^T`.
    pub w_r: f64,
    /// Weight on the skew part, entering as `i w_i (A - A^T)`.
    pub w_i: f64,
    /// Weight on `J - I`.
    pub w_c: f64,
}

impl MleWeights {
    pub fn new(w_r: f64, w_i: f64, w_c: f64) -> Self {
        Self { w_r, w_i, w_c }
    }

    pub fn is_finite(&self) -> bool {
        self.w_r.is_finite() && self.w_i.is_finite() && self.w_c.is_finite()
    }
}

/// Evaluates the three likelihood weights. Inputs are expected to be clamped
/// with [`ModelParams::clamped`].
pub fn mle_weights(p: f64, q: f64, eta: f64) -> MleWeights {
    let w_i = ((1.0 - eta) / eta).ln();
    let w_r = 2.0 * (p / q).ln() + 2.0 * ((1.0 - q) / (1.0 - p)).ln()
        - (4.0 * eta * (1.0 - eta)).ln();
    let w_c = 2.0 * ((1.0 - p) / (1.0 - q)).ln();
    MleWeights { w_r, w_i, w_c }
}

/// Sparsity pattern of `A + A^T` and `A - A^T` in compressed rows.
///
/// Built once per graph and shared by every operator on it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPattern {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    /// `A_uv + A_vu`
    sym: Vec<f64>,
    /// `A_uv - A_vu`
    skew: Vec<f64>,
}

impl FlowPattern {
    pub fn new(g: &DirectedGraph) -> Self {
        let n = g.n();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut cols = Vec::new();
        let mut sym = Vec::new();
        let mut skew = Vec::new();
        for u in 0..n {
            // Merge the sorted out- and in-lists of u.
            let mut outs = g.out_edges(u).peekable();
            let mut ins = g.in_edges(u).peekable();
            loop {
                let (v, a_uv, a_vu) = match (outs.peek().copied(), ins.peek().copied()) {
                    (None, None) => break,
                    (Some((v, w)), None) => {
                        outs.next();
                        (v, w, 0.0)
                    }
                    (None, Some((v, w))) => {
                        ins.next();
                        (v, 0.0, w)
                    }
                    (Some((vo, wo)), Some((vi, wi))) => {
                        if vo == vi {
                            outs.next();
                            ins.next();
                            (vo, wo, wi)
                        } else if vo < vi {
                            outs.next();
                            (vo, wo, 0.0)
                        } else {
                            ins.next();
                            (vi, 0.0, wi)
                        }
                    }
                };
                cols.push(v);
                sym.push(a_uv + a_vu);
                skew.push(a_uv - a_vu);
            }
            offsets.push(cols.len());
        }
        Self {
            n,
            offsets,
            cols,
            sym,
            skew,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries (twice the number of connected vertex pairs).
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// Matrix-free `w_r (A + A^T) + i w_i (A - A^T) + w_c (J - I)`.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    pattern: Arc<FlowPattern>,
    weights: MleWeights,
    coeffs: Vec<Complex64>,
    row_bound: f64,
}

/// Row count above which [`HermitianOperator::apply`] splits rows across threads.
const PARALLEL_ROWS: usize = 8192;

impl HermitianOperator {
    pub fn new(pattern: Arc<FlowPattern>, weights: MleWeights) -> Self {
        let coeffs: Vec<Complex64> = pattern
            .sym
            .iter()
            .zip(&pattern.skew)
            .map(|(&s, &k)| Complex64::new(weights.w_r * s, weights.w_i * k))
            .collect();
        let n = pattern.n;
        let ones = weights.w_c.abs() * (n as f64 - 1.0);
        let row_bound = (0..n)
            .map(|u| {
                coeffs[pattern.offsets[u]..pattern.offsets[u + 1]]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<f64>()
                    + ones
            })
            .fold(0.0, f64::max);
        Self {
            pattern,
            weights,
            coeffs,
            row_bound,
        }
    }

    pub fn weights(&self) -> MleWeights {
        self.weights
    }

    /// Coefficient of the all-ones term.
    pub fn ones_coeff(&self) -> f64 {
        self.weights.w_c
    }

    /// Diagonal correction that turns `w_c J` into `w_c (J - I)`.
    pub fn diag_shift(&self) -> f64 {
        -self.weights.w_c
    }

    pub fn pattern(&self) -> &FlowPattern {
        &self.pattern
    }

    fn apply_rows(&self, rows: std::ops::Range<usize>, x: &[Complex64], total: Complex64, y: &mut [Complex64]) {
        let p = &self.pattern;
        let w_c = self.weights.w_c;
        for (out, u) in y.iter_mut().zip(rows) {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in p.offsets[u]..p.offsets[u + 1] {
                acc += self.coeffs[j] * x[p.cols[j]];
            }
            *out = acc + w_c * total + self.diag_shift() * x[u];
        }
    }
}

/// Builds the likelihood operator of `g` for the given weights.
pub fn build_operator(g: &DirectedGraph, weights: MleWeights) -> HermitianOperator {
    HermitianOperator::new(Arc::new(FlowPattern::new(g)), weights)
}

/// Applies the operator, checking the vector length.
pub fn apply_operator(op: &HermitianOperator, x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.len() != op.dim() {
        return Err(Error::SizeMismatch {
            expected: op.dim(),
            actual: x.len(),
        });
    }
    Ok(op.apply_vec(x))
}

impl HermitianOp for HermitianOperator {
    fn dim(&self) -> usize {
        self.pattern.n
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        let total = if self.weights.w_c != 0.0 {
            x.iter().sum::<Complex64>()
        } else {
            Complex64::new(0.0, 0.0)
        };
        if n < PARALLEL_ROWS {
            self.apply_rows(0..n, x, total, y);
        } else {
            let chunk = PARALLEL_ROWS / 4;
            y.par_chunks_mut(chunk).enumerate().for_each(|(i, ys)| {
                let start = i * chunk;
                self.apply_rows(start..start + ys.len(), x, total, ys);
            });
        }
    }

    fn row_abs_bound(&self) -> f64 {
        self.row_bound
    }
}

/// Complex indicator of a bipartition: `i` on community 0, `1` on community 1.
pub fn indicator_vector(part: &Labeling) -> Vec<Complex64> {
    part.assignments()
        .iter()
        .map(|&c| {
            if c == 0 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect()
}

/// `x* H x` evaluated through the operator.
pub fn quadratic_form(g: &DirectedGraph, weights: MleWeights, part: &Labeling) -> Result<f64> {
    part.check_bipartition(g.n())?;
    let op = build_operator(g, weights);
    let x = indicator_vector(part);
    let hx = op.apply_vec(&x);
    Ok(crate::operator::inner(&x, &hx).re)
}

/// The same quadratic form written in flow statistics:
/// `w_r (2|E| - 2 TF) + 2 w_i NF + w_c (|C1|^2 + |C2|^2 - N)`.
pub fn flow_objective(g: &DirectedGraph, weights: MleWeights, part: &Labeling) -> Result<f64> {
    let flows = cut_flows(g, part)?;
    let sizes = part.sizes();
    let (n1, n2) = (sizes[0] as f64, sizes[1] as f64);
    Ok(weights.w_r * (2.0 * g.total_weight() - 2.0 * flows.total())
        + 2.0 * weights.w_i * flows.net()
        + weights.w_c * (n1 * n1 + n2 * n2 - g.n() as f64))
}

fn check_binary_model_graph(g: &DirectedGraph) -> Result<()> {
    if let Some((src, dst, weight)) = g.find_non_unit_edge() {
        return Err(Error::WeightedGraph { src, dst, weight });
    }
    if let Some((u, v)) = g.find_reciprocal_pair() {
        return Err(Error::ReciprocalEdge(u, v));
    }
    Ok(())
}

/// Exact DSBM log-likelihood `sum over u < v of log P(A_uv | labels)`,
/// community 0 being the source. Evaluated pair by pair in `O(N^2)`.
pub fn log_likelihood(g: &DirectedGraph, part: &Labeling, params: &ModelParams) -> Result<f64> {
    part.check_bipartition(g.n())?;
    check_binary_model_graph(g)?;
    Ok(pairwise_log_likelihood(g, part.assignments(), params))
}

fn pairwise_log_likelihood(g: &DirectedGraph, labels: &[usize], params: &ModelParams) -> f64 {
    let ModelParams { p, q, eta } = *params;
    let intra_edge = (p / 2.0).ln();
    let intra_none = (1.0 - p).ln();
    let inter_forward = ((1.0 - eta) * q).ln();
    let inter_backward = (eta * q).ln();
    let inter_none = (1.0 - q).ln();
    let n = g.n();
    let mut total = 0.0;
    for u in 0..n {
        for v in u + 1..n {
            let uv = g.weight(u, v) > 0.0;
            let vu = g.weight(v, u) > 0.0;
            total += if labels[u] == labels[v] {
                if uv || vu {
                    intra_edge
                } else {
                    intra_none
                }
            } else {
                // orient the pair as (source-side, sink-side)
                let (to_sink, to_source) = if labels[u] == 0 { (uv, vu) } else { (vu, uv) };
                if to_sink {
                    inter_forward
                } else if to_source {
                    inter_backward
                } else {
                    inter_none
                }
            };
        }
    }
    total
}

/// Largest vertex count accepted by [`exhaustive_mle`].
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Maximum-likelihood bipartition by enumeration of all `2^N` labelings.
///
/// Bit `u` of the encoding is the community of vertex `u`. Labelings within
/// a relative `1e-9` of the maximum count as ties and the smallest encoding
/// wins. The result is returned with vertex 0 in community 0.
pub fn exhaustive_mle(g: &DirectedGraph, params: &ModelParams) -> Result<Labeling> {
    let n = g.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    check_binary_model_graph(g)?;
    let values: Vec<f64> = (0u64..1 << n)
        .into_par_iter()
        .map(|mask| pairwise_log_likelihood(g, &decode(mask, n), params))
        .collect();
    let best = smallest_argmax(&values);
    Ok(Labeling::new(decode(best as u64, n), 2)?.canonical())
}

/// Index of the first value within `1e-9` (relative) of the maximum.
pub fn smallest_argmax(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * max.abs().max(1.0);
    values
        .iter()
        .position(|&v| v >= max - tol)
        .expect("nonempty value list")
}

/// Labels of the bipartition with encoding `mask`.
pub fn decode(mask: u64, n: usize) -> Vec<usize> {
    (0..n).map(|u| ((mask >> u) & 1) as usize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DenseHermitian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weight_limits() {
        let w = mle_weights(0.3, 0.3, 0.2);
        assert_eq!(w.w_c, 0.0);
        let w = mle_weights(0.3, 0.1, 0.5);
        assert_eq!(w.w_i, 0.0);
    }

    #[test]
    fn weights_match_high_precision_values() {
        // mpmath at 40 digits
        let w = mle_weights(0.01, 0.005, 0.1);
        assert!((w.w_i - 2.197_224_577_336_219_4).abs() < 1e-13);
        assert!((w.w_r - 2.418_021_196_711_786_3).abs() < 1e-13);
        assert!((w.w_c - -0.010_075_588_059_914_318).abs() < 1e-15);
    }

    #[test]
    fn clamping_keeps_weights_finite() {
        let params = ModelParams::new(0.0, 1.0, 0.0).clamped(10);
        assert_eq!(params.p, 1.0 / 90.0);
        assert_eq!(params.q, 1.0 - 1.0 / 90.0);
        assert_eq!(params.eta, ETA_MIN);
        assert!(params.weights().is_finite());
        let params = ModelParams::new(0.5, 0.5, 0.9).clamped(10);
        assert_eq!(params.eta, 0.5);
    }

    #[test]
    fn single_edge_operator() {
        let g = DirectedGraph::from_pairs(2, [(0, 1)]).unwrap();
        let w = MleWeights::new(1.5, 0.7, 0.0);
        let dense = DenseHermitian::from_operator(&build_operator(&g, w)).unwrap();
        let m = dense.matrix();
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
        assert_eq!(m[(0, 1)], c(1.5, 0.7));
        assert_eq!(m[(1, 0)], c(1.5, -0.7));
        let y = apply_operator(&build_operator(&g, w), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(y, vec![c(0.0, 0.0), c(1.5, -0.7)]);
    }

    #[test]
    fn ones_term_is_j_minus_i() {
        let g = DirectedGraph::from_pairs(3, [(0, 1), (2, 1)]).unwrap();
        let op = build_operator(&g, MleWeights::new(0.0, 0.0, 1.0));
        let m = DenseHermitian::from_operator(&op).unwrap().into_matrix();
        for u in 0..3 {
            for v in 0..3 {
                let expected = if u == v { 0.0 } else { 1.0 };
                assert_eq!(m[(u, v)], c(expected, 0.0));
            }
        }
        assert_eq!(op.diag_shift(), -1.0);
    }

    #[test]
    fn zero_operator_and_size_check() {
        let g = DirectedGraph::new(3, []).unwrap();
        let op = build_operator(&g, MleWeights::new(1.0, 1.0, 0.0));
        assert_eq!(apply_operator(&op, &[c(1.0, 2.0); 3]).unwrap(), vec![c(0.0, 0.0); 3]);
        assert_eq!(op.row_abs_bound(), 0.0);
        assert!(matches!(
            apply_operator(&op, &[c(1.0, 0.0)]),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn quadratic_form_hand_example() {
        let g = DirectedGraph::from_pairs(4, [(0, 2), (1, 3), (0, 1)]).unwrap();
        let part = Labeling::new(vec![0, 0, 1, 1], 2).unwrap();
        let w = MleWeights::new(0.3, 1.1, -0.2);
        let expected = 2.0 * w.w_r + 4.0 * w.w_i + 4.0 * w.w_c;
        assert!((quadratic_form(&g, w, &part).unwrap() - expected).abs() < 1e-12);
        assert!((flow_objective(&g, w, &part).unwrap() - expected).abs() < 1e-12);

        let swapped = quadratic_form(&g, w, &part.swapped()).unwrap();
        assert!((swapped - (2.0 * w.w_r - 4.0 * w.w_i + 4.0 * w.w_c)).abs() < 1e-12);

        let empty = DirectedGraph::new(4, []).unwrap();
        let q = quadratic_form(&empty, MleWeights::new(1.0, 1.0, 0.0), &part).unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn likelihood_special_cases() {
        let params = ModelParams::new(0.2, 0.2, 0.3);
        let empty = DirectedGraph::new(5, []).unwrap();
        let part = Labeling::new(vec![0, 1, 1, 0, 1], 2).unwrap();
        let ll = log_likelihood(&empty, &part, &params).unwrap();
        assert!((ll - 10.0 * 0.8f64.ln()).abs() < 1e-12);

        let g = DirectedGraph::from_pairs(2, [(1, 0)]).unwrap();
        let same = Labeling::new(vec![0, 0], 2).unwrap();
        assert!((log_likelihood(&g, &same, &params).unwrap() - 0.1f64.ln()).abs() < 1e-15);

        // sink -> source edge gets eta q
        let cross = Labeling::new(vec![0, 1], 2).unwrap();
        let ll = log_likelihood(&g, &cross, &params).unwrap();
        assert!((ll - (0.3f64 * 0.2).ln()).abs() < 1e-15);
    }

    #[test]
    fn likelihood_rejects_non_model_graphs() {
        let params = ModelParams::new(0.2, 0.2, 0.3);
        let part = Labeling::new(vec![0, 1], 2).unwrap();
        let recip = DirectedGraph::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(
            log_likelihood(&recip, &part, &params),
            Err(Error::ReciprocalEdge(0, 1))
        );
        let weighted = DirectedGraph::new(2, [(0, 1, 2.0)]).unwrap();
        assert!(matches!(
            log_likelihood(&weighted, &part, &params),
            Err(Error::WeightedGraph { .. })
        ));
    }

    #[test]
    fn exhaustive_recovers_planted_cut() {
        let g = DirectedGraph::from_pairs(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let params = ModelParams::new(0.5, 0.5, 0.1);
        let best = exhaustive_mle(&g, &params).unwrap();
        assert_eq!(best.assignments(), &[0, 0, 1, 1]);
    }

    #[test]
    fn exhaustive_ties_on_constant_objective() {
        let g = DirectedGraph::new(4, []).unwrap();
        let params = ModelParams::new(0.3, 0.3, 0.2);
        let best = exhaustive_mle(&g, &params).unwrap();
        assert_eq!(best.assignments(), &[0, 0, 0, 0]);
    }

    #[test]
    fn exhaustive_size_limit() {
        let g = DirectedGraph::new(21, []).unwrap();
        assert_eq!(
            exhaustive_mle(&g, &ModelParams::new(0.3, 0.3, 0.2)),
            Err(Error::TooLarge { size: 21, limit: 20 })
        );
    }

    #[test]
    fn scaled_likelihood_differs_from_form_by_constant() {
        // 4 log L(sigma) - x* H x is the same for every labeling.
        let g = DirectedGraph::from_pairs(5, [(0, 1), (0, 3), (2, 4), (3, 2), (4, 1)]).unwrap();
        let params = ModelParams::new(0.4, 0.15, 0.2);
        let w = params.weights();
        let offsets: Vec<f64> = (0u64..32)
            .map(|mask| {
                let part = Labeling::new(decode(mask, 5), 2).unwrap();
                4.0 * log_likelihood(&g, &part, &params).unwrap()
                    - quadratic_form(&g, w, &part).unwrap()
            })
            .collect();
        for o in &offsets {
            assert!((o - offsets[0]).abs() < 1e-10, "{o} vs {}", offsets[0]);
        }
    }
}
