//! Dense vector kernels on `f64` slices.
//!
//! Reductions are evaluated left to right so results are reproducible
//! regardless of the `parallel` feature.

use crate::error::{Error, Result};

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `x - y`
pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// `x + y`
pub fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn is_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Relative distance `||x - y|| / max(||y||, tiny)`.
pub fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let d = norm(&sub(x, y));
    let s = norm(y);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Euclidean inner product with a length check.
pub fn inner(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dims("inner", x.len(), y.len()));
    }
    Ok(dot(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_basics() {
        assert_eq!(inner(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(inner(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert!(matches!(
            inner(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inner_is_symmetric() {
        let x: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..37).map(|i| (i as f64 * 1.91).cos()).collect();
        assert_eq!(inner(&x, &y).unwrap(), inner(&y, &x).unwrap());
    }
}
