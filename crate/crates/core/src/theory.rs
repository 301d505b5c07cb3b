//! Population-level quantities of the two-community model.
//!
//! Under the model, the expected likelihood matrix is block constant:
//!
//! ```text
//! E[H]_uv = a                                  u != v in the same block
//!         = b = w_r q + w_c + i w_i (1 - 2 eta) q    u in block 1, v in block 2
//!         = conj(b)                            u in block 2, v in block 1
//! a = w_r p + w_c,   E[H]_uu = 0
//! ```
//!
//! so `E[H] = M Q M^T - a I` with `Q = [[a, b], [conj(b), a]]` and `M` the
//! block indicator matrix. Its spectrum is `mu_+ - a`, `mu_- - a` and `-a`
//! with multiplicity `N - 2`, where `mu_(+/-) = N a / 2 +/- Delta` are the
//! eigenvalues of `D Q D`, `D = diag(sqrt(n1), sqrt(n2))`, and
//!
//! ```text
//! 2 Delta = sqrt(N^2 a^2 - 4 n1 n2 (a^2 - |b|^2)).
//! ```
//!
//! All functions take raw parameters and clamp them for `N = n1 + n2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::mle::{MleWeights, ModelParams};

/// Default approximation factor of the k-means step.
pub const DEFAULT_EPSILON: f64 = 1.0;

/// Placeholder for the probability exponent, which the analysis leaves as an
/// unspecified absolute constant.
pub const EPSILON0: &str = "unspecified absolute constant";

fn check_sizes(n1: usize, n2: usize) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::BadParams(format!("both blocks need members, got ({n1}, {n2})")));
    }
    Ok(())
}

/// The clamped parameters and weights used by every function here.
pub fn population_params(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> (ModelParams, MleWeights) {
    let params = ModelParams::new(p, q, eta).clamped(n1 + n2);
    (params, params.weights())
}

/// `(a, b)`: the within-block entry and the block-1-to-block-2 entry.
pub fn core_entries(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> (f64, Complex64) {
    let (params, w) = population_params(n1, n2, p, q, eta);
    let a = w.w_r * params.p + w.w_c;
    let b = Complex64::new(
        w.w_r * params.q + w.w_c,
        w.w_i * (1.0 - 2.0 * params.eta) * params.q,
    );
    (a, b)
}

/// Dense `E[H]`, block 1 first.
pub fn population_matrix(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> Result<DMatrix<Complex64>> {
    check_sizes(n1, n2)?;
    let n = n1 + n2;
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let (a, b) = core_entries(n1, n2, p, q, eta);
    Ok(DMatrix::from_fn(n, n, |u, v| match (u < n1, v < n1) {
        _ if u == v => Complex64::new(0.0, 0.0),
        (true, true) | (false, false) => Complex64::new(a, 0.0),
        (true, false) => b,
        (false, true) => b.conj(),
    }))
}

/// The eigengap quantity `Delta`.
pub fn eigengap_delta(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> f64 {
    let (a, b) = core_entries(n1, n2, p, q, eta);
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    // (n1 - n2)^2 a^2 + 4 n1 n2 |b|^2 is the same radicand without cancellation
    let radicand = (n1f - n2f).powi(2) * a * a + 4.0 * n1f * n2f * b.norm_sqr();
    debug_assert!(radicand >= 0.0 && n > 0.0);
    0.5 * radicand.sqrt()
}

/// The three distinct population eigenvalues `(mu_+ - a, mu_- - a, -a)`.
pub fn population_spectrum(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> [f64; 3] {
    let (a, _) = core_entries(n1, n2, p, q, eta);
    let delta = eigengap_delta(n1, n2, p, q, eta);
    let half = (n1 + n2) as f64 * a / 2.0;
    [half + delta - a, half - delta - a, -a]
}

/// Top eigenvector of `D Q D` (largest signed eigenvalue `N a / 2 + Delta`).
fn core_top_vector(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> Result<[Complex64; 2]> {
    let (a, b) = core_entries(n1, n2, p, q, eta);
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let alpha = n1f * a;
    let gamma = n2f * a;
    let beta = (n1f * n2f).sqrt() * b;
    let delta = eigengap_delta(n1, n2, p, q, eta);
    let mu = (alpha + gamma) / 2.0 + delta;
    let scale = alpha.abs().max(gamma.abs()).max(beta.norm()).max(f64::MIN_POSITIVE);
    if delta <= 1e-14 * scale {
        // D Q D is a multiple of the identity
        return Err(Error::DegenerateCore);
    }
    // two expressions for the same eigenvector; keep the longer one
    let first = [beta, Complex64::new(mu - alpha, 0.0)];
    let second = [Complex64::new(mu - gamma, 0.0), beta.conj()];
    let len = |v: &[Complex64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = if len(&first) >= len(&second) { first } else { second };
    let l = len(&v);
    Ok([v[0] / l, v[1] / l])
}

/// The two values of the population top eigenvector: `(x1/sqrt(n1), x2/sqrt(n2))`.
pub fn population_centroids(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> Result<[Complex64; 2]> {
    check_sizes(n1, n2)?;
    let x = core_top_vector(n1, n2, p, q, eta)?;
    Ok([x[0] / (n1 as f64).sqrt(), x[1] / (n2 as f64).sqrt()])
}

/// Distance `d` between the two population centroids.
///
/// Returns [`Error::DegenerateCore`] when the two values coincide.
pub fn centroid_distance(n1: usize, n2: usize, p: f64, q: f64, eta: f64) -> Result<f64> {
    let c = population_centroids(n1, n2, p, q, eta)?;
    let d = (c[0] - c[1]).norm();
    if d <= 1e-15 {
        return Err(Error::DegenerateCore);
    }
    Ok(d)
}

/// `L(eta) = |w_r' + i (1 - 2 eta)| sin(theta / 2)` with
/// `w_r' = log(1 / (4 eta (1 - eta))) / log((1 - eta) / eta)` and
/// `cos theta = w_r' / |w_r' + i (1 - 2 eta)|`.
///
/// Evaluated as `t sqrt(r / (2 (r + w_r')))`, `t = 1 - 2 eta`, `r = |w_r' + i t|`,
/// which has no cancellation near `eta = 0.5`. Inputs are clamped to
/// `[1e-4, 0.5]` like every other direction parameter.
pub fn l_eta(eta: f64) -> f64 {
    let eta = eta.clamp(crate::mle::ETA_MIN, 0.5);
    let t = 1.0 - 2.0 * eta;
    if t == 0.0 {
        return 0.0;
    }
    let w = normalized_symmetric_weight(eta);
    let r = w.hypot(t);
    t * (r / (2.0 * (r + w))).sqrt()
}

/// `log(1 / (4 eta (1 - eta))) / log((1 - eta) / eta)` for `p = q`, which
/// tends to 0 as `eta -> 0.5` and to 1 as `eta -> 0`.
pub fn normalized_symmetric_weight(eta: f64) -> f64 {
    let t = 1.0 - 2.0 * eta;
    if t == 0.0 {
        return 0.0;
    }
    // 4 eta (1 - eta) = 1 - t^2 and (1 - eta) / eta = (1 + t) / (1 - t)
    -(-t * t).ln_1p() / (2.0 * t.atanh())
}

/// `C = (2 + eps) sqrt(w_r^2 + w_i^2) (log N / (N p_max) + 1)`.
pub fn concentration_constant(n1: usize, n2: usize, p: f64, q: f64, eta: f64, epsilon: f64) -> f64 {
    let (params, w) = population_params(n1, n2, p, q, eta);
    let n = (n1 + n2) as f64;
    let p_max = params.p.max(params.q);
    (2.0 + epsilon) * w.w_r.hypot(w.w_i) * (n.ln() / (n * p_max) + 1.0)
}

/// Misclustering-rate bound `64 (2 + eps) C^2 p_max log N / (d^2 Delta^2)`.
pub fn error_bound(n1: usize, n2: usize, p: f64, q: f64, eta: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::BadParams(format!("epsilon must be positive, got {epsilon}")));
    }
    let d = centroid_distance(n1, n2, p, q, eta)?;
    let delta = eigengap_delta(n1, n2, p, q, eta);
    let (params, _) = population_params(n1, n2, p, q, eta);
    let c = concentration_constant(n1, n2, p, q, eta, epsilon);
    let n = (n1 + n2) as f64;
    Ok(64.0 * (2.0 + epsilon) * c * c * params.p.max(params.q) * n.ln() / (d * d * delta * delta))
}

/// Every population diagnostic for one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub params: ModelParams,
    pub weights: MleWeights,
    /// Largest-magnitude population eigenvalue.
    pub lambda1: f64,
    /// The population eigenvalue nearest to `lambda1`.
    pub lambda2: f64,
    pub delta: f64,
    /// `None` when the two centroids coincide.
    pub centroid_distance: Option<f64>,
    pub concentration: f64,
    pub epsilon: f64,
    pub epsilon0: String,
    /// `None` when the centroids coincide and the bound is unbounded.
    pub error_bound: Option<f64>,
}

/// Largest-magnitude eigenvalue of a spectrum and its nearest neighbour.
///
/// Ties in magnitude go to the positive value. `multiplicity[i]` counts
/// copies of `values[i]`; a repeated top value has itself as neighbour.
pub fn magnitude_gap_pair(values: &[f64], multiplicity: &[usize]) -> (f64, f64) {
    let top = (0..values.len())
        .filter(|&i| multiplicity[i] > 0)
        .max_by(|&i, &j| {
            values[i]
                .abs()
                .total_cmp(&values[j].abs())
                .then(values[i].total_cmp(&values[j]))
        })
        .expect("nonempty spectrum");
    if multiplicity[top] > 1 {
        return (values[top], values[top]);
    }
    let neighbour = (0..values.len())
        .filter(|&i| i != top && multiplicity[i] > 0)
        .min_by(|&i, &j| {
            (values[i] - values[top])
                .abs()
                .total_cmp(&(values[j] - values[top]).abs())
        })
        .map_or(values[top], |i| values[i]);
    (values[top], neighbour)
}

pub fn population_summary(n1: usize, n2: usize, p: f64, q: f64, eta: f64, epsilon: f64) -> Result<PopulationSummary> {
    check_sizes(n1, n2)?;
    let (params, weights) = population_params(n1, n2, p, q, eta);
    let spectrum = population_spectrum(n1, n2, p, q, eta);
    let (lambda1, lambda2) = magnitude_gap_pair(&spectrum, &[1, 1, n1 + n2 - 2]);
    let centroid_distance = match centroid_distance(n1, n2, p, q, eta) {
        Ok(d) => Some(d),
        Err(Error::DegenerateCore) => None,
        Err(e) => return Err(e),
    };
    let error_bound = match centroid_distance {
        Some(_) => Some(error_bound(n1, n2, p, q, eta, epsilon)?),
        None => None,
    };
    Ok(PopulationSummary {
        params,
        weights,
        lambda1,
        lambda2,
        delta: eigengap_delta(n1, n2, p, q, eta),
        centroid_distance,
        concentration: concentration_constant(n1, n2, p, q, eta, epsilon),
        epsilon,
        epsilon0: EPSILON0.to_string(),
        error_bound,
    })
}
