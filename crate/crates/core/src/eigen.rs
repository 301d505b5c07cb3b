//! Leading eigenpair of a Hermitian operator.
//!
//! [`top_eigenpair`] runs power iteration on `H + sI`, where `s` is the
//! largest absolute row sum of `H`. That shift makes every eigenvalue of the
//! iterated operator nonnegative, so the iteration converges to the
//! largest *signed* eigenvalue of `H` rather than the largest in magnitude.
//!
//! [`dense_top_eigenpair`] is the exact reference for small matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{inner, norm, phase_aligned_distance, DenseHermitian, HermitianOp};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenConfig {
    /// Threshold on the phase-aligned distance between successive iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the complex Gaussian start vector.
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 5000,
            seed: 0,
        }
    }
}

impl EigenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::BadParams(format!("eigen tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::BadParams("eigen max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenStatus {
    Converged,
    /// `max_iter` reached before the stopping rule held; the result is the
    /// iterate with the smallest residual.
    NoConvergence,
    /// The operator bound is zero; the result is the start vector with `value = 0`.
    ZeroOperator,
}

impl EigenStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::NoConvergence => "no_convergence",
            Self::ZeroOperator => "zero_operator",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub value: f64,
    /// Unit norm; defined up to a global phase.
    pub vector: Vec<Complex64>,
    pub status: EigenStatus,
    pub iterations: usize,
    /// `||H v - value v||`
    pub residual: f64,
    /// The shift `s`.
    pub norm_bound: f64,
}

/// Unit complex Gaussian vector of length `n`.
pub fn random_start(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = rng_from_seed(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let len = norm(&v);
    v.iter_mut().for_each(|z| *z /= len);
    v
}

/// Largest-signed eigenpair by shifted power iteration.
///
/// Each step costs one application of `op`. The loop stops once the
/// phase-aligned step length is at most `tol` and the residual is at most
/// `10 tol s`.
pub fn top_eigenpair(op: &dyn HermitianOp, cfg: &EigenConfig) -> Result<EigenResult> {
    deflated_eigenpair(op, cfg, &[])
}

/// Largest-signed eigenpair of `op` restricted to the orthogonal complement
/// of `against`, which must be orthonormal.
///
/// With `against` holding the leading eigenvectors this yields the next one.
/// Stopping rule and statuses are those of [`top_eigenpair`].
pub fn deflated_eigenpair(
    op: &dyn HermitianOp,
    cfg: &EigenConfig,
    against: &[Vec<Complex64>],
) -> Result<EigenResult> {
    cfg.validate()?;
    let n = op.dim();
    if n == 0 {
        return Err(Error::GraphTooSmall { n, min: 1 });
    }
    if against.iter().any(|u| u.len() != n) {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: against.iter().map(Vec::len).find(|&m| m != n).unwrap_or(n),
        });
    }
    let shift = op.row_abs_bound();
    let mut b = random_start(n, cfg.seed);
    if !against.is_empty() {
        project_out(&mut b, against);
        let len = norm(&b);
        if !(len > 0.0) {
            return Err(Error::BadParams("deflation space spans the whole space".into()));
        }
        b.iter_mut().for_each(|z| *z /= len);
    }
    if !(shift > 0.0) {
        return Ok(EigenResult {
            value: 0.0,
            vector: b,
            status: EigenStatus::ZeroOperator,
            iterations: 0,
            residual: 0.0,
            norm_bound: 0.0,
        });
    }
    let residual_bound = 10.0 * cfg.tol * shift;
    let mut hb = vec![Complex64::new(0.0, 0.0); n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let mut best: Option<(f64, f64, Vec<Complex64>)> = None;
    for iter in 1..=cfg.max_iter {
        op.apply(&b, &mut hb);
        let value = inner(&b, &hb).re;
        let residual = hb
            .iter()
            .zip(&b)
            .map(|(h, x)| (h - value * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        for ((out, h), x) in next.iter_mut().zip(&hb).zip(&b) {
            *out = h + shift * x;
        }
        project_out(&mut next, against);
        let len = norm(&next);
        if !(len > 0.0) {
            // b lies in the eigenspace of -s; it is an eigenvector already
            return Ok(EigenResult {
                value,
                vector: b,
                status: EigenStatus::Converged,
                iterations: iter,
                residual,
                norm_bound: shift,
            });
        }
        next.iter_mut().for_each(|z| *z /= len);
        let step = phase_aligned_distance(&next, &b);
        if step <= cfg.tol && residual <= residual_bound {
            return Ok(EigenResult {
                value,
                vector: b,
                status: EigenStatus::Converged,
                iterations: iter,
                residual,
                norm_bound: shift,
            });
        }
        if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
            best = Some((residual, value, b.clone()));
        }
        std::mem::swap(&mut b, &mut next);
    }
    let (residual, value, vector) = best.expect("max_iter >= 1");
    Ok(EigenResult {
        value,
        vector,
        status: EigenStatus::NoConvergence,
        iterations: cfg.max_iter,
        residual,
        norm_bound: shift,
    })
}

fn project_out(v: &mut [Complex64], against: &[Vec<Complex64>]) {
    for u in against {
        let c = inner(u, v);
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    LargestSigned,
    /// Largest `|lambda|`; on a tie between `+m` and `-m` the positive one wins.
    LargestMagnitude,
}

/// Largest dimension accepted by the dense routines.
pub const DENSE_LIMIT: usize = 2000;

/// Full Hermitian eigendecomposition, eigenvalues ascending.
pub fn dense_eigen(matrix: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = matrix.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let checked = DenseHermitian::new(matrix.clone())?;
    let eig = SymmetricEigen::new(checked.into_matrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(n, n, |u, j| eig.eigenvectors[(u, order[j])]);
    Ok((values, vectors))
}

/// Exact top eigenpair of a small dense Hermitian matrix.
pub fn dense_top_eigenpair(
    matrix: &DMatrix<Complex64>,
    select: Selection,
) -> Result<(f64, Vec<Complex64>)> {
    let n = matrix.nrows();
    if n == 0 {
        return Err(Error::GraphTooSmall { n, min: 1 });
    }
    let (values, vectors) = dense_eigen(matrix)?;
    let j = match select {
        Selection::LargestSigned => n - 1,
        Selection::LargestMagnitude => {
            let (lo, hi) = (values[0], values[n - 1]);
            if -lo > hi {
                0
            } else {
                n - 1
            }
        }
    };
    Ok((values[j], vectors.column(j).iter().copied().collect()))
}
