use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use amli::amli::{apply_amli_tilde, CycleParams};
use amli::hierarchy::{build_geometric, GeometricProblem};
use amli::problems::assemble_poisson;
use amli::rng::normal_vector;
use amli::smoothers::SmootherSpec;

fn spmv(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmv");
    for k in [7, 9] {
        let (a, _) = assemble_poisson(k).unwrap();
        let x = normal_vector(a.n_rows(), 1, "bench", 0);
        let mut y = vec![0.0; a.n_rows()];
        g.bench_with_input(BenchmarkId::new("seq", a.n_rows()), &k, |b, _| {
            b.iter(|| a.spmv_seq_into(black_box(&x), &mut y))
        });
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("par", a.n_rows()), &k, |b, _| {
            b.iter(|| a.spmv_par_into(black_box(&x), &mut y))
        });
    }
    g.finish();
}

fn sample_batch(c: &mut Criterion) {
    let h = build_geometric(GeometricProblem::Poisson, 6, SmootherSpec::default()).unwrap();
    let a = h.a(6);
    let p = CycleParams::new(2);
    let one = |i: usize| {
        let v = normal_vector(a.n_rows(), 1, "bench-batch", i as u64);
        apply_amli_tilde(&h, 6, &a.mul_vec(&v), &p).unwrap()[0]
    };
    let mut g = c.benchmark_group("tilde_batch_16");
    g.sample_size(10);
    g.bench_function("seq", |b| b.iter(|| (0..16).map(one).sum::<f64>()));
    g.bench_function("par", |b| {
        b.iter(|| amli::par::map_indices(16, one).into_iter().sum::<f64>())
    });
    g.finish();
}

criterion_group!(benches, spmv, sample_batch);
criterion_main!(benches);
