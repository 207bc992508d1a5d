use super::vector::{dot, norm};
use super::CsrMatrix;

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 500;

/// Result of a power iteration run.
#[derive(Debug, Clone)]
pub struct PowerEstimate {
    /// Last Rayleigh quotient.
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Unit-norm iterate belonging to `value`.
    pub vector: Vec<f64>,
}

/// Deterministic start vector: all ones plus a small non-periodic perturbation.
pub fn start_vector(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 1.0 + 1e-3 * (((i * 7919 + 13) % 101) as f64 / 101.0 - 0.5))
        .collect()
}

/// Power iteration for the dominant eigenvalue of a symmetric operator.
///
/// Stops once successive Rayleigh quotients agree to `tol` (relative) or
/// after `max_iter` products.
pub fn power_iteration<F>(n: usize, apply: F, tol: f64, max_iter: usize) -> PowerEstimate
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = start_vector(n);
    let nx = norm(&x);
    if n == 0 || nx == 0.0 {
        return PowerEstimate {
            value: 0.0,
            converged: true,
            iterations: 0,
            vector: x,
        };
    }
    x.iter_mut().for_each(|v| *v /= nx);
    let mut prev = f64::NAN;
    let mut value = 0.0;
    for it in 1..=max_iter {
        let y = apply(&x);
        value = dot(&x, &y);
        let ny = norm(&y);
        if ny == 0.0 {
            return PowerEstimate {
                value: 0.0,
                converged: true,
                iterations: it,
                vector: x,
            };
        }
        if (value - prev).abs() <= tol * value.abs() {
            return PowerEstimate {
                value,
                converged: true,
                iterations: it,
                vector: x,
            };
        }
        prev = value;
        x = y.into_iter().map(|v| v / ny).collect();
    }
    PowerEstimate {
        value,
        converged: false,
        iterations: max_iter,
        vector: x,
    }
}

/// Power-iteration estimate of `rho(A)` for symmetric `A`.
pub fn spectral_radius(a: &CsrMatrix) -> PowerEstimate {
    power_iteration(a.n_rows(), |x| a.mul_vec(x), POWER_TOL, POWER_MAX_ITER)
}
