use amli::hierarchy::{build_geometric, GeometricProblem, Hierarchy};
use amli::linalg::{spectral_radius, CsrMatrix};
use amli::problems::{assemble_poisson, DEFAULT_LOW_COEFFICIENT};
use amli::smoothers::{measure_smoothing_constant, SmootherSpec};
use amli::verify::{check_approximation_constant, check_lemma_approx, check_smoothing_constant};

const SEED: u64 = 20240501;

fn poisson(k: usize) -> Hierarchy {
    build_geometric(GeometricProblem::Poisson, k, SmootherSpec::default()).unwrap()
}

fn dense_eigenvalues(a: &CsrMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = a.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn spectral_radius_matches_dense_eigensolve() {
    let (a, _) = assemble_poisson(3).unwrap();
    let dense = *dense_eigenvalues(&a).last().unwrap();
    let est = spectral_radius(&a).value;
    assert!((est - dense).abs() <= 1e-6 * dense, "{est} vs {dense}");
}

#[test]
fn smoothing_constant_matches_dense_oracle() {
    let (a, _) = assemble_poisson(3).unwrap();
    let spec = SmootherSpec::default();
    let sm = spec.bind(&a).unwrap();
    let n = a.n_rows();
    // Symmetric part of R~ = R + R^t - R^t A R, column by column.
    let mut cols = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.extend(sm.composite_tilde(&a, &e));
    }
    let m = nalgebra::DMatrix::from_column_slice(n, n, &cols);
    let sym = (&m + m.transpose()) * 0.5;
    let lmin = sym.symmetric_eigenvalues().min();
    let rho = *dense_eigenvalues(&a).last().unwrap();
    let oracle = rho * lmin;
    let c = measure_smoothing_constant(&a, &spec, 100, SEED).unwrap();
    assert!((c.c2 - oracle).abs() <= 0.1 * oracle, "{} vs {oracle}", c.c2);
    assert!(c.c2 <= c.rho * c.sampled_min + 1e-12);
}

#[test]
fn jump_problem_is_badly_conditioned() {
    let cond = |a: &CsrMatrix| {
        let e = dense_eigenvalues(a);
        e.last().unwrap() / e[0]
    };
    let p = cond(&assemble_poisson(4).unwrap().0);
    let j = cond(&amli::problems::assemble_jump(4, DEFAULT_LOW_COEFFICIENT).unwrap().0);
    assert!(j > 1e4 * p, "jump {j:e}, poisson {p:e}");
}

#[test]
fn approximation_constant_is_uniform_for_poisson() {
    let h = poisson(5);
    let c: Vec<f64> = (3..=5)
        .map(|k| {
            let r = check_approximation_constant(&h, k, 100, SEED).unwrap();
            assert!(r.passed, "{r}");
            r.value("c1").unwrap()
        })
        .collect();
    let (lo, hi) = (
        c.iter().cloned().fold(f64::INFINITY, f64::min),
        c.iter().cloned().fold(0.0, f64::max),
    );
    assert!(hi < 2.0 * lo, "{c:?}");
}

#[test]
fn approximation_constant_reflects_lost_regularity() {
    let p = check_approximation_constant(&poisson(3), 3, 100, SEED).unwrap();
    let hj = build_geometric(
        GeometricProblem::Jump {
            low: DEFAULT_LOW_COEFFICIENT,
        },
        3,
        SmootherSpec::default(),
    )
    .unwrap();
    let j = check_approximation_constant(&hj, 3, 100, SEED).unwrap();
    let (cp, cj) = (p.value("c1").unwrap(), j.value("c1").unwrap());
    assert!(cj > 1e3 * cp, "jump {cj:e}, poisson {cp:e}");
}

#[test]
fn lemma_constant_is_consistent_with_c1_over_c2() {
    let h = poisson(4);
    let lemma = check_lemma_approx(&h, 4, 100, SEED).unwrap();
    let c1 = check_approximation_constant(&h, 4, 100, SEED)
        .unwrap()
        .value("c1")
        .unwrap();
    let c2 = check_smoothing_constant(&h, 4, 100, SEED).unwrap().value("c2").unwrap();
    let eta = lemma.value("eta").unwrap();
    let ratio = c1 / c2;
    // eta <= c1 / c2 is the lemma. The bound is loose by a factor of about 12
    // here; an independent dense computation gives c1 = 5.82358,
    // c2 = 0.889956, eta = 0.547046.
    assert!(eta <= ratio, "eta {eta}, c1/c2 {ratio}");
    assert!((c1 - 5.82358).abs() < 1e-4 && (c2 - 0.889956).abs() < 1e-5 && (eta - 0.547046).abs() < 1e-5);
    assert!((ratio / eta - 11.962).abs() < 0.01, "{}", ratio / eta);
    let delta = lemma.value("delta").unwrap();
    assert!((delta - eta / (1.0 + eta)).abs() < 1e-15 && delta < 1.0);
}
