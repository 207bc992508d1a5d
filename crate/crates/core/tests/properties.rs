use amli::linalg::vector::{dot, rel_diff};
use amli::linalg::{a_inner, dense_solve, inner};
use amli::problems::{assemble_jump, assemble_poisson};
use proptest::prelude::*;

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmv_is_linear(x in vec_of(49), y in vec_of(49), s in -5.0f64..5.0) {
        let (a, _) = assemble_poisson(3).unwrap();
        let comb: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| s * xi + yi).collect();
        let lhs = a.mul_vec(&comb);
        let (ax, ay) = (a.mul_vec(&x), a.mul_vec(&y));
        let rhs: Vec<f64> = ax.iter().zip(&ay).map(|(p, q)| s * p + q).collect();
        let scale = lhs.iter().chain(&rhs).fold(1.0f64, |m, v| m.max(v.abs()));
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn dense_solve_inverts_spmv(x in vec_of(49)) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let (a, _) = assemble_poisson(3).unwrap();
        let back = dense_solve(&a, &a.mul_vec(&x)).unwrap();
        prop_assert!(rel_diff(&back, &x) <= 1e-12);
    }

    #[test]
    fn inner_products_are_symmetric(x in vec_of(49), y in vec_of(49)) {
        let (a, _) = assemble_jump(3, 1e-2).unwrap();
        prop_assert_eq!(inner(&x, &y).unwrap(), inner(&y, &x).unwrap());
        let (xy, yx) = (a_inner(&a, &x, &y).unwrap(), a_inner(&a, &y, &x).unwrap());
        prop_assert!((xy - yx).abs() <= 1e-12 * (1.0 + xy.abs()));
        prop_assert!(a_inner(&a, &x, &x).unwrap() >= 0.0);
        prop_assert!((dot(&x, &y) - inner(&x, &y).unwrap()).abs() == 0.0);
    }
}
