use amli::amli::{
    apply_amli, apply_amli_ns, apply_amli_ns_tilde, apply_amli_tilde, nonlinear_pcg, CycleParams, Truncation,
};
use amli::cycles::apply_v_cycle;
use amli::hierarchy::{build_geometric, GeometricProblem, Hierarchy};
use amli::linalg::vector::{dot, rel_diff, sub};
use amli::rng::normal_vector;
use amli::smoothers::SmootherSpec;
use amli::verify::{check_two_grid_factor, check_uniform_contraction, contraction_estimate, dense_operator};

const SEED: u64 = 20240501;

fn poisson(k: usize) -> Hierarchy {
    build_geometric(GeometricProblem::Poisson, k, SmootherSpec::default()).unwrap()
}

fn energy_ratio(h: &Hierarchy, k: usize, apply: impl Fn(&[f64]) -> Vec<f64>, samples: u64) -> f64 {
    let a = h.a(k);
    (0..samples)
        .map(|i| {
            let v = normal_vector(a.n_rows(), SEED, "cycles-test", i);
            let e = sub(&v, &apply(&a.mul_vec(&v)));
            (dot(&a.mul_vec(&e), &e) / dot(&a.mul_vec(&v), &v)).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `||I - B A||_A` of the V-cycle at level `k`, through `A^{1/2} E A^{-1/2}`.
fn v_cycle_energy_norm(h: &Hierarchy, k: usize) -> f64 {
    let a = h.a(k);
    let e = dense_operator(a.n_rows(), |v| sub(v, &apply_v_cycle(h, k, &a.mul_vec(v)).unwrap()));
    let eig = a.to_nalgebra().symmetric_eigen();
    let half = &eig.eigenvectors
        * nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let s = &half * e * half.clone().try_inverse().unwrap();
    s.symmetric_eigenvalues().amax()
}

#[test]
fn two_level_v_cycle_is_the_two_grid_method() {
    let h2 = poisson(2);
    let (v, tg) = (v_cycle_energy_norm(&h2, 2), check_two_grid_factor(&h2, 2).unwrap());
    assert!((v - tg).abs() <= 1e-10, "{v} vs {tg}");

    // An inexact coarse solve can only make the symmetric cycle worse.
    let h3 = poisson(3);
    let (v, tg) = (v_cycle_energy_norm(&h3, 3), check_two_grid_factor(&h3, 3).unwrap());
    assert!(v >= tg - 1e-12 && v < 1.0, "{v} vs {tg}");
}

#[test]
fn v_cycle_contracts_up_to_level_eight() {
    let h = poisson(8);
    for k in 3..=8 {
        let r = energy_ratio(&h, k, |f| apply_v_cycle(&h, k, f).unwrap(), 10);
        assert!(r < 0.5, "k={k}: {r}");
    }
}

#[test]
fn zero_smoother_reduces_to_coarse_correction() {
    let h = poisson(4).with_smoother(SmootherSpec::zero()).unwrap();
    // A second PCG step would meet a zero preconditioned residual.
    let p = CycleParams::new(1);
    for i in 0..5 {
        let v = normal_vector(225, SEED, "zero-smoother", i);
        let lifted = h
            .p(4)
            .mul_vec(&apply_amli_ns_tilde(&h, 3, &h.p(4).mul_vec_transpose(&v), &p).unwrap());
        assert!(rel_diff(&apply_amli_ns(&h, 4, &v, &p).unwrap(), &lifted) <= 1e-14);
        let sym = h
            .p(4)
            .mul_vec(&apply_amli_tilde(&h, 3, &h.p(4).mul_vec_transpose(&v), &p).unwrap());
        assert!(rel_diff(&apply_amli(&h, 4, &v, &p).unwrap(), &sym) <= 1e-14);
    }
}

#[test]
fn zero_input_gives_zero_output() {
    let h = poisson(4);
    let z = vec![0.0; 225];
    for p in [
        CycleParams::new(1),
        CycleParams::new(2).with_truncation(Truncation::SteepestDescent),
    ] {
        assert_eq!(apply_amli(&h, 4, &z, &p).unwrap(), z);
        assert_eq!(apply_amli_tilde(&h, 4, &z, &p).unwrap(), z);
        assert_eq!(apply_amli_ns_tilde(&h, 4, &z, &p).unwrap(), z);
        assert_eq!(nonlinear_pcg(h.a(4), |r| Ok(r.to_vec()), &z, &p).unwrap(), z);
    }
    assert_eq!(apply_v_cycle(&h, 4, &z).unwrap(), z);
}

#[test]
fn nonlinear_cycles_are_not_linear() {
    let h = poisson(4);
    let p = CycleParams::new(2);
    let x = normal_vector(225, SEED, "nonlinear", 0);
    let y = normal_vector(225, SEED, "nonlinear", 1);
    let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
    let lhs = apply_amli_tilde(&h, 4, &sum, &p).unwrap();
    let tx = apply_amli_tilde(&h, 4, &x, &p).unwrap();
    let ty = apply_amli_tilde(&h, 4, &y, &p).unwrap();
    let rhs: Vec<f64> = tx.iter().zip(&ty).map(|(a, b)| a + b).collect();
    assert!(rel_diff(&lhs, &rhs) > 1e-6);
    // Scaling commutes: every step of the PCG is homogeneous of degree one.
    let scaled: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
    let t3 = apply_amli_tilde(&h, 4, &scaled, &p).unwrap();
    assert!(rel_diff(&t3, &tx.iter().map(|v| 3.0 * v).collect::<Vec<_>>()) <= 1e-13);
}

#[test]
fn tilde_contraction_is_uniform_in_level() {
    let h = poisson(8);
    let p = CycleParams::new(2);
    let est: Vec<(usize, f64)> = (3..=8)
        .map(|k| (k, contraction_estimate(&h, k, &p, 10, SEED).unwrap()))
        .collect();
    let r = check_uniform_contraction("uniform", &est, 0.05, 10);
    assert!(r.passed, "{r:?}");
}
