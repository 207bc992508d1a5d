//! Linear multigrid cycles: the `\`-cycle (pre-smoothing only) and the
//! symmetric V-cycle. Both start from a zero guess and approximate `A_k^{-1} f`.

use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::linalg::vector::{axpy, sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearCycleKind {
    Backslash,
    V,
}

pub(crate) fn check_rhs(h: &Hierarchy, k: usize, f: &[f64]) -> Result<()> {
    h.check_level(k)?;
    if f.len() != h.level(k).dim() {
        return Err(Error::dims("cycle right-hand side", h.level(k).dim(), f.len()));
    }
    Ok(())
}

/// `B_k^{ns} f`.
pub fn apply_backslash(h: &Hierarchy, k: usize, f: &[f64]) -> Result<Vec<f64>> {
    check_rhs(h, k, f)?;
    Ok(backslash(h, k, f))
}

/// `B_k f`.
pub fn apply_v_cycle(h: &Hierarchy, k: usize, f: &[f64]) -> Result<Vec<f64>> {
    check_rhs(h, k, f)?;
    Ok(v_cycle(h, k, f))
}

pub fn apply_linear(h: &Hierarchy, kind: LinearCycleKind, k: usize, f: &[f64]) -> Result<Vec<f64>> {
    match kind {
        LinearCycleKind::Backslash => apply_backslash(h, k, f),
        LinearCycleKind::V => apply_v_cycle(h, k, f),
    }
}

fn coarse_solve(h: &Hierarchy, f: &[f64]) -> Vec<f64> {
    let mut u = f.to_vec();
    h.coarse_solver().solve_in_place(&mut u);
    u
}

fn backslash(h: &Hierarchy, k: usize, f: &[f64]) -> Vec<f64> {
    if k == 1 {
        return coarse_solve(h, f);
    }
    let a = h.a(k);
    let p = h.p(k);
    let mut u = h.smoother(k).apply(a, f);
    let g = p.mul_vec_transpose(&sub(f, &a.mul_vec(&u)));
    let e = backslash(h, k - 1, &g);
    axpy(1.0, &p.mul_vec(&e), &mut u);
    u
}

fn v_cycle(h: &Hierarchy, k: usize, f: &[f64]) -> Vec<f64> {
    if k == 1 {
        return coarse_solve(h, f);
    }
    let a = h.a(k);
    let p = h.p(k);
    let sm = h.smoother(k);
    let mut u = sm.apply(a, f);
    let g = p.mul_vec_transpose(&sub(f, &a.mul_vec(&u)));
    let e = v_cycle(h, k - 1, &g);
    axpy(1.0, &p.mul_vec(&e), &mut u);
    let post = sm.apply_transpose(a, &sub(f, &a.mul_vec(&u)));
    axpy(1.0, &post, &mut u);
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{build_geometric, GeometricProblem};
    use crate::linalg::vector::{dot, norm, rel_diff};
    use crate::rng::normal_vector;
    use crate::smoothers::SmootherSpec;

    fn poisson(k: usize) -> Hierarchy {
        build_geometric(GeometricProblem::Poisson, k, SmootherSpec::default()).unwrap()
    }

    #[test]
    fn coarsest_level_is_exact() {
        let h = poisson(3);
        let f = [0.7];
        for kind in [LinearCycleKind::Backslash, LinearCycleKind::V] {
            let u = apply_linear(&h, kind, 1, &f).unwrap();
            assert!(rel_diff(&h.a(1).mul_vec(&u), &f) < 1e-10);
        }
    }

    #[test]
    fn cycles_are_linear() {
        let h = poisson(4);
        let n = h.level(4).dim();
        let f = normal_vector(n, 3, "f", 0);
        let g = normal_vector(n, 3, "g", 0);
        let (alpha, beta) = (1.7, -0.3);
        let comb: Vec<f64> = f.iter().zip(&g).map(|(x, y)| alpha * x + beta * y).collect();
        for kind in [LinearCycleKind::Backslash, LinearCycleKind::V] {
            let bf = apply_linear(&h, kind, 4, &f).unwrap();
            let bg = apply_linear(&h, kind, 4, &g).unwrap();
            let expected: Vec<f64> = bf.iter().zip(&bg).map(|(x, y)| alpha * x + beta * y).collect();
            let got = apply_linear(&h, kind, 4, &comb).unwrap();
            assert!(rel_diff(&got, &expected) < 1e-12);
        }
    }

    #[test]
    fn v_cycle_is_self_adjoint() {
        let h = poisson(3);
        let n = h.level(3).dim();
        let f = normal_vector(n, 5, "f", 0);
        let g = normal_vector(n, 5, "g", 0);
        let bf = apply_v_cycle(&h, 3, &f).unwrap();
        let bg = apply_v_cycle(&h, 3, &g).unwrap();
        let (l, r) = (dot(&bf, &g), dot(&f, &bg));
        assert!((l - r).abs() <= 1e-12 * norm(&bf) * norm(&g));
    }

    #[test]
    fn errors() {
        let h = poisson(3);
        assert!(apply_v_cycle(&h, 4, &[0.0; 3]).is_err());
        assert!(apply_v_cycle(&h, 0, &[0.0; 3]).is_err());
        assert!(apply_backslash(&h, 2, &[0.0; 3]).is_err());
    }
}
