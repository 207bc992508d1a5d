//! Sparse and dense linear-algebra kernels.

mod csr;
pub mod dense;
pub mod mm;
pub mod power;
pub mod vector;

pub use csr::{CsrMatrix, PAR_SPMV_ROWS};
pub use dense::{dense_solve, DenseFactorization, DEFAULT_DENSE_LIMIT};
pub use power::{power_iteration, spectral_radius, PowerEstimate};
pub use vector::inner;

use crate::error::{Error, Result};

/// `A x` with a dimension check.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.n_cols() {
        return Err(Error::dims("spmv", a.n_cols(), x.len()));
    }
    Ok(a.mul_vec(x))
}

/// `(A x, y)`.
pub fn a_inner(a: &CsrMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != a.n_cols() {
        return Err(Error::dims("a_inner", a.n_cols(), x.len()));
    }
    if y.len() != a.n_rows() {
        return Err(Error::dims("a_inner", a.n_rows(), y.len()));
    }
    Ok(vector::dot(&a.mul_vec(x), y))
}

/// `sqrt((A x, x))`; a clearly negative energy means `A` is not SPD.
pub fn a_norm(a: &CsrMatrix, x: &[f64]) -> Result<f64> {
    let e = a_inner(a, x, x)?;
    if e < -1e-12 * vector::dot(x, x) {
        return Err(Error::NotSpd(format!("negative energy {e:e}")));
    }
    Ok(e.max(0.0).sqrt())
}

/// Galerkin triple product `P^t A P`, symmetrised to remove round-off asymmetry.
pub fn rap(p: &CsrMatrix, a: &CsrMatrix) -> Result<CsrMatrix> {
    if !a.is_square() {
        return Err(Error::dims("rap (A square)", a.n_rows(), a.n_cols()));
    }
    if p.n_rows() != a.n_rows() {
        return Err(Error::dims("rap (P rows)", a.n_rows(), p.n_rows()));
    }
    let pt = p.transpose();
    if let Some(j) = (0..pt.n_rows()).find(|&j| pt.row(j).1.iter().all(|&v| v == 0.0)) {
        return Err(Error::EmptyAggregate(j));
    }
    let ap = a.matmul(p)?;
    pt.matmul(&ap)?.symmetrized()
}
