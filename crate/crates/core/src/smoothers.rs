//! Smoothers `R`, their adjoints `R^t`, and the symmetrised composites.
//!
//! With `s` sweeps, `I - R A = (I - R_1 A)^s` where `R_1` is a single sweep,
//! and the adjoint runs the reversed sweep `s` times.

use crate::error::{Error, Result};
use crate::linalg::vector::{dot, norm, sub};
use crate::linalg::{power_iteration, spectral_radius, CsrMatrix};
use crate::rng;

pub const DEFAULT_JACOBI_WEIGHT: f64 = 0.7;
pub const DEFAULT_RICHARDSON_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    /// `R = (D + L)^{-1}`, adjoint `(D + U)^{-1}`.
    ForwardGaussSeidel,
    /// `R = w D^{-1}`.
    Jacobi,
    /// `R = (w / rho(A)) I`.
    Richardson,
    /// `R = 0`. Only useful for checking smoother-free reductions.
    Zero,
}

impl std::str::FromStr for SmootherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gs" | "gauss-seidel" => Ok(Self::ForwardGaussSeidel),
            "jacobi" => Ok(Self::Jacobi),
            "richardson" => Ok(Self::Richardson),
            other => Err(Error::InvalidParameter(format!("unknown smoother `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherSpec {
    pub kind: SmootherKind,
    /// Damping for Jacobi and Richardson; ignored by Gauss-Seidel.
    pub weight: f64,
    pub sweeps: usize,
}

impl SmootherSpec {
    pub fn gauss_seidel() -> Self {
        Self {
            kind: SmootherKind::ForwardGaussSeidel,
            weight: 1.0,
            sweeps: 1,
        }
    }

    pub fn jacobi(weight: f64) -> Self {
        Self {
            kind: SmootherKind::Jacobi,
            weight,
            sweeps: 1,
        }
    }

    pub fn richardson(weight: f64) -> Self {
        Self {
            kind: SmootherKind::Richardson,
            weight,
            sweeps: 1,
        }
    }

    pub fn zero() -> Self {
        Self {
            kind: SmootherKind::Zero,
            weight: 0.0,
            sweeps: 1,
        }
    }

    /// Default weight for `kind`.
    pub fn of_kind(kind: SmootherKind) -> Self {
        match kind {
            SmootherKind::ForwardGaussSeidel => Self::gauss_seidel(),
            SmootherKind::Jacobi => Self::jacobi(DEFAULT_JACOBI_WEIGHT),
            SmootherKind::Richardson => Self::richardson(DEFAULT_RICHARDSON_WEIGHT),
            SmootherKind::Zero => Self::zero(),
        }
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    /// Bind to a matrix, precomputing the diagonal or the spectral scaling.
    pub fn bind(&self, a: &CsrMatrix) -> Result<Smoother> {
        Smoother::new(*self, a)
    }
}

impl Default for SmootherSpec {
    fn default() -> Self {
        Self::gauss_seidel()
    }
}

/// A smoother bound to one level operator.
#[derive(Debug, Clone)]
pub struct Smoother {
    spec: SmootherSpec,
    diag: Vec<f64>,
    /// Effective scalar for Richardson (`w / rho(A)`) and Jacobi (`w`).
    scale: f64,
}

impl Smoother {
    pub fn new(spec: SmootherSpec, a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("smoother", a.n_rows(), a.n_cols()));
        }
        if spec.sweeps == 0 && spec.kind != SmootherKind::Zero {
            return Err(Error::InvalidParameter("smoother sweeps must be >= 1".into()));
        }
        let diag = a.diagonal();
        let scale = match spec.kind {
            SmootherKind::ForwardGaussSeidel => 1.0,
            SmootherKind::Jacobi => {
                if !(spec.weight > 0.0 && spec.weight < 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Jacobi weight must lie in (0, 2), got {}",
                        spec.weight
                    )));
                }
                spec.weight
            }
            SmootherKind::Richardson => {
                if !(spec.weight > 0.0 && spec.weight < 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Richardson weight must lie in (0, 2) (in units of 1/rho(A)), got {}",
                        spec.weight
                    )));
                }
                let rho = spectral_radius(a).value;
                if !(rho > 0.0) {
                    return Err(Error::NotSpd(format!("spectral radius estimate {rho}")));
                }
                spec.weight / rho
            }
            SmootherKind::Zero => 0.0,
        };
        if matches!(spec.kind, SmootherKind::ForwardGaussSeidel | SmootherKind::Jacobi) {
            if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
                return Err(Error::BadDiagonal(i));
            }
        }
        Ok(Self { spec, diag, scale })
    }

    pub fn spec(&self) -> &SmootherSpec {
        &self.spec
    }

    /// `R f`.
    pub fn apply(&self, a: &CsrMatrix, f: &[f64]) -> Vec<f64> {
        self.run(a, f, false)
    }

    /// `R^t f`.
    pub fn apply_transpose(&self, a: &CsrMatrix, f: &[f64]) -> Vec<f64> {
        self.run(a, f, true)
    }

    /// `R~ v` with `I - R~ A = (I - R A)(I - R^t A)`, i.e. `R^t v + R (v - A R^t v)`.
    pub fn composite_tilde(&self, a: &CsrMatrix, v: &[f64]) -> Vec<f64> {
        let rt_v = self.apply_transpose(a, v);
        let mut out = self.apply(a, &sub(v, &a.mul_vec(&rt_v)));
        out.iter_mut().zip(&rt_v).for_each(|(o, x)| *o += x);
        out
    }

    /// `R- v` with `I - R- A = (I - R^t A)(I - R A)`, i.e. `R v + R^t (v - A R v)`.
    pub fn composite_bar(&self, a: &CsrMatrix, v: &[f64]) -> Vec<f64> {
        let r_v = self.apply(a, v);
        let mut out = self.apply_transpose(a, &sub(v, &a.mul_vec(&r_v)));
        out.iter_mut().zip(&r_v).for_each(|(o, x)| *o += x);
        out
    }

    /// `(I - R A) v`.
    pub fn error_step(&self, a: &CsrMatrix, v: &[f64]) -> Vec<f64> {
        sub(v, &self.apply(a, &a.mul_vec(v)))
    }

    /// `(I - R^t A) v`.
    pub fn error_step_transpose(&self, a: &CsrMatrix, v: &[f64]) -> Vec<f64> {
        sub(v, &self.apply_transpose(a, &a.mul_vec(v)))
    }

    fn run(&self, a: &CsrMatrix, f: &[f64], transpose: bool) -> Vec<f64> {
        debug_assert_eq!(f.len(), a.n_rows());
        match self.spec.kind {
            SmootherKind::Zero => vec![0.0; f.len()],
            SmootherKind::ForwardGaussSeidel => {
                let mut u = vec![0.0; f.len()];
                for _ in 0..self.spec.sweeps {
                    if transpose {
                        self.gs_sweep(a, f, &mut u, (0..f.len()).rev());
                    } else {
                        self.gs_sweep(a, f, &mut u, 0..f.len());
                    }
                }
                u
            }
            SmootherKind::Jacobi | SmootherKind::Richardson => {
                let mut u = self.diagonal_step(f);
                for _ in 1..self.spec.sweeps {
                    let r = sub(f, &a.mul_vec(&u));
                    let du = self.diagonal_step(&r);
                    u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
                }
                u
            }
        }
    }

    fn diagonal_step(&self, r: &[f64]) -> Vec<f64> {
        match self.spec.kind {
            SmootherKind::Jacobi => r.iter().zip(&self.diag).map(|(ri, di)| self.scale * ri / di).collect(),
            _ => r.iter().map(|ri| self.scale * ri).collect(),
        }
    }

    /// One in-place Gauss-Seidel sweep in the given row order.
    fn gs_sweep(&self, a: &CsrMatrix, f: &[f64], u: &mut [f64], order: impl Iterator<Item = usize>) {
        for i in order {
            let (cols, vals) = a.row(i);
            let mut s = f[i];
            for (&j, &v) in cols.iter().zip(vals) {
                if j != i {
                    s -= v * u[j];
                }
            }
            u[i] = s / self.diag[i];
        }
    }
}

/// `R f` for an unbound spec.
pub fn smooth(a: &CsrMatrix, spec: &SmootherSpec, f: &[f64]) -> Result<Vec<f64>> {
    check_len(a, f)?;
    Ok(spec.bind(a)?.apply(a, f))
}

/// `R^t f` for an unbound spec.
pub fn smooth_transpose(a: &CsrMatrix, spec: &SmootherSpec, f: &[f64]) -> Result<Vec<f64>> {
    check_len(a, f)?;
    Ok(spec.bind(a)?.apply_transpose(a, f))
}

/// `R~ v` for an unbound spec.
pub fn composite_tilde(a: &CsrMatrix, spec: &SmootherSpec, v: &[f64]) -> Result<Vec<f64>> {
    check_len(a, v)?;
    Ok(spec.bind(a)?.composite_tilde(a, v))
}

fn check_len(a: &CsrMatrix, f: &[f64]) -> Result<()> {
    if f.len() != a.n_rows() {
        return Err(Error::dims("smoother", a.n_rows(), f.len()));
    }
    Ok(())
}

/// Measured smoothing-property constant.
#[derive(Debug, Clone)]
pub struct SmoothingConstant {
    /// `rho(A) * min (R~ v, v) / (v, v)` over all candidates.
    pub c2: f64,
    pub rho: f64,
    /// Minimum over the random samples alone.
    pub sampled_min: f64,
    /// Rayleigh quotient of the power-iteration candidate for `lambda_min(R~)`.
    pub extremal: f64,
    pub samples: usize,
}

/// Estimate `c2` in `(c2 / rho(A)) (v, v) <= (R~ v, v)`.
///
/// Candidates are `samples` standard normal vectors plus the iterate of a
/// shifted power iteration aimed at the smallest eigenvalue of `R~`.
pub fn measure_smoothing_constant(
    a: &CsrMatrix,
    spec: &SmootherSpec,
    samples: usize,
    seed: u64,
) -> Result<SmoothingConstant> {
    let sm = spec.bind(a)?;
    let n = a.n_rows();
    let rho = spectral_radius(a).value;
    let quotient = |v: &[f64]| -> Result<f64> {
        let q = dot(&sm.composite_tilde(a, v), v) / dot(v, v);
        if q < 0.0 {
            return Err(Error::SmootherNotConvergent(format!("(R~ v, v) / (v, v) = {q:e} < 0")));
        }
        Ok(q)
    };

    let sampled = crate::par::map_indices(samples, |s| {
        quotient(&rng::normal_vector(n, seed, "smoothing-constant", s as u64))
    });
    let mut sampled_min = f64::INFINITY;
    for q in sampled {
        sampled_min = sampled_min.min(q?);
    }

    let top = power_iteration(n, |x| sm.composite_tilde(a, x), 1e-10, 2000);
    let shift = 1.01 * top.value.abs().max(f64::MIN_POSITIVE);
    let low = power_iteration(
        n,
        |x| {
            let rx = sm.composite_tilde(a, x);
            x.iter().zip(&rx).map(|(xi, ri)| shift * xi - ri).collect()
        },
        1e-12,
        5000,
    );
    let extremal = if norm(&low.vector) > 0.0 {
        quotient(&low.vector)?
    } else {
        f64::INFINITY
    };
    Ok(SmoothingConstant {
        c2: rho * sampled_min.min(extremal),
        rho,
        sampled_min,
        extremal,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::rel_diff;

    fn two_by_two() -> CsrMatrix {
        CsrMatrix::from_dense(2, 2, &[4.0, -1.0, -1.0, 4.0]).unwrap()
    }

    #[test]
    fn gauss_seidel_hand_examples() {
        let a = two_by_two();
        let gs = SmootherSpec::gauss_seidel();
        assert_eq!(smooth(&a, &gs, &[4.0, 4.0]).unwrap(), vec![1.0, 1.25]);
        assert_eq!(smooth_transpose(&a, &gs, &[4.0, 4.0]).unwrap(), vec![1.25, 1.0]);
    }

    #[test]
    fn diagonal_cases() {
        let d = CsrMatrix::from_diagonal(&[2.0, 4.0, 8.0]);
        let f = [2.0, 2.0, 2.0];
        assert_eq!(
            smooth(&d, &SmootherSpec::gauss_seidel(), &f).unwrap(),
            vec![1.0, 0.5, 0.25]
        );
        let a = CsrMatrix::from_diagonal(&[2.0, 2.0]);
        assert_eq!(
            smooth(&a, &SmootherSpec::jacobi(1.0), &[2.0, 2.0]).unwrap(),
            vec![1.0, 1.0]
        );
        let j = SmootherSpec::jacobi(0.7);
        assert_eq!(
            smooth(&two_by_two(), &j, &[1.0, 3.0]).unwrap(),
            smooth_transpose(&two_by_two(), &j, &[1.0, 3.0]).unwrap()
        );
    }

    #[test]
    fn composite_on_scaled_identity() {
        let a = CsrMatrix::from_diagonal(&[2.0, 2.0]);
        let out = composite_tilde(&a, &SmootherSpec::jacobi(1.0), &[3.0, -1.0]).unwrap();
        assert_eq!(out, vec![1.5, -0.5]);
    }

    #[test]
    fn composite_identity_holds_for_gauss_seidel() {
        let (a, _) = crate::problems::assemble_poisson(3).unwrap();
        let sm = SmootherSpec::gauss_seidel().with_sweeps(2).bind(&a).unwrap();
        let v = rng::normal_vector(a.n_rows(), 7, "t", 0);
        let lhs = sub(&v, &sm.composite_tilde(&a, &a.mul_vec(&v)));
        let rhs = sm.error_step(&a, &sm.error_step_transpose(&a, &v));
        assert!(rel_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        let a = two_by_two();
        assert!(SmootherSpec::jacobi(2.0).bind(&a).is_err());
        assert!(SmootherSpec::jacobi(0.0).bind(&a).is_err());
        assert!(SmootherSpec::richardson(2.5).bind(&a).is_err());
        assert!(SmootherSpec::gauss_seidel().with_sweeps(0).bind(&a).is_err());
        let zero_diag = CsrMatrix::from_dense(2, 2, &[0.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            smooth(&zero_diag, &SmootherSpec::gauss_seidel(), &[1.0, 1.0]),
            Err(Error::BadDiagonal(0))
        ));
        assert!(smooth(&a, &SmootherSpec::gauss_seidel(), &[1.0]).is_err());
        assert_eq!("gs".parse::<SmootherKind>().unwrap(), SmootherKind::ForwardGaussSeidel);
        assert!("ilu".parse::<SmootherKind>().is_err());
    }

    #[test]
    fn richardson_scales_by_spectral_radius() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 4.0]);
        let out = smooth(&a, &SmootherSpec::richardson(1.0), &[4.0, 4.0, 4.0]).unwrap();
        for v in out {
            assert!((v - 1.0).abs() < 1e-6);
        }
        let c = measure_smoothing_constant(&a, &SmootherSpec::richardson(1.0), 20, 1).unwrap();
        assert!(c.c2 > 0.0);
    }
}
