use nalgebra::{Cholesky, DMatrix, DVector, DVectorViewMut, Dyn};

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense factorisation.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Cholesky factorisation `A = L L^t` of a small SPD matrix.
#[derive(Debug, Clone)]
pub struct DenseFactorization {
    chol: Cholesky<f64, Dyn>,
}

impl DenseFactorization {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_limit(a, DEFAULT_DENSE_LIMIT)
    }

    pub fn with_limit(a: &CsrMatrix, limit: usize) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("dense factorization", a.n_rows(), a.n_cols()));
        }
        if a.n_rows() > limit {
            return Err(Error::DenseLimitExceeded { dim: a.n_rows(), limit });
        }
        Self::from_row_major(a.n_rows(), a.to_dense())
    }

    /// Factor a dense row-major symmetric matrix (only the lower triangle is read).
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::dims("dense factorization", n * n, data.len()));
        }
        // Row-major lower triangle is the column-major upper one; transpose.
        let m = DMatrix::from_vec(n, n, data).transpose();
        let chol = Cholesky::new(m).ok_or_else(|| Error::NotSpd("Cholesky pivot is not positive".into()))?;
        Ok(Self { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// Solve `A u = f`.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim() {
            return Err(Error::dims("dense solve", self.dim(), f.len()));
        }
        let mut u = f.to_vec();
        self.solve_in_place(&mut u);
        Ok(u)
    }

    pub fn solve_in_place(&self, u: &mut [f64]) {
        let n = u.len();
        self.chol.solve_mut(&mut DVectorViewMut::from_slice(u, n));
    }

    /// `L^t x` (used to move into the energy-norm frame).
    pub fn mul_lower_transpose(&self, x: &[f64]) -> Vec<f64> {
        let l = self.chol.l_dirty().lower_triangle();
        l.tr_mul(&DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// Solve `L^t y = x`.
    pub fn solve_lower_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = DVector::from_column_slice(x);
        self.chol.l_dirty().tr_solve_lower_triangular_mut(&mut y);
        y.as_slice().to_vec()
    }
}

/// Solve `A u = f` for SPD `A` by dense Cholesky.
pub fn dense_solve(a: &CsrMatrix, f: &[f64]) -> Result<Vec<f64>> {
    DenseFactorization::new(a)?.solve(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::{norm, sub};

    #[test]
    fn diagonal_solve() {
        let a = CsrMatrix::from_diagonal(&[2.0, 2.0]);
        let u = dense_solve(&a, &[2.0, 4.0]).unwrap();
        assert!(norm(&sub(&u, &[1.0, 2.0])) <= 1e-15);
        assert_eq!(dense_solve(&a, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_dense(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(dense_solve(&a, &[1.0, 1.0]), Err(Error::NotSpd(_))));
    }

    #[test]
    fn respects_limit() {
        let a = CsrMatrix::identity(5);
        assert!(matches!(
            DenseFactorization::with_limit(&a, 4),
            Err(Error::DenseLimitExceeded { dim: 5, limit: 4 })
        ));
    }

    #[test]
    fn residual_is_small() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let f: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.1).collect();
        let u = dense_solve(&a, &f).unwrap();
        assert!(norm(&sub(&a.mul_vec(&u), &f)) <= 1e-12 * norm(&f));
    }
}
