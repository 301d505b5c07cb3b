//! Matrix-free Hermitian operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A Hermitian linear map on `C^n` that can be applied to vectors.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;

    /// Writes `H x` into `y`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);

    /// Upper bound on the spectral norm: the largest absolute row sum.
    fn row_abs_bound(&self) -> f64;

    fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        y
    }
}

/// Dense Hermitian matrix, used as a test double and as the exact oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    matrix: DMatrix<Complex64>,
}

impl DenseHermitian {
    /// Largest tolerated `|H_uv - conj(H_vu)|`.
    pub const HERMITIAN_TOL: f64 = 1e-10;

    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::SizeMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        let mut deviation: f64 = 0.0;
        for u in 0..n {
            for v in u..n {
                deviation = deviation.max((matrix[(u, v)] - matrix[(v, u)].conj()).norm());
            }
        }
        if deviation > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(deviation));
        }
        Ok(Self { matrix })
    }

    /// Builds a Hermitian matrix from row-major entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |u, v| rows[u][v]))
    }

    /// Materializes any operator by applying it to the standard basis.
    pub fn from_operator(op: &dyn HermitianOp) -> Result<Self> {
        let n = op.dim();
        let mut matrix = DMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for v in 0..n {
            e[v] = Complex64::new(1.0, 0.0);
            op.apply(&e, &mut col);
            for u in 0..n {
                matrix[(u, v)] = col[u];
            }
            e[v] = Complex64::new(0.0, 0.0);
        }
        Self::new(matrix)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }
}

impl HermitianOp for DenseHermitian {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        for (u, out) in y.iter_mut().enumerate().take(n) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (v, xv) in x.iter().enumerate() {
                acc += self.matrix[(u, v)] * xv;
            }
            *out = acc;
        }
    }

    fn row_abs_bound(&self) -> f64 {
        (0..self.dim())
            .map(|u| self.matrix.row(u).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Hermitian inner product `<x, y> = sum conj(x_u) y_u`, summed in index order.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter()
        .zip(y)
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `min over phi of ||a - e^{i phi} b||` for vectors of equal length.
pub fn phase_aligned_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap = inner(b, a);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
