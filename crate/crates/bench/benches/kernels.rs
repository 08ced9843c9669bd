use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qgs::linalg::c;
use qgs::{find_eigenvalues, regularized_trace, smatrix_series, Polynomial, Regularization, SpectrumOptions, TraceOptions};
use qgs_bench::{bump, dirichlet_interval, kirchhoff_star, lasso};

fn spectrum(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("spectrum");
    group.sample_size(10);
    let graphs = [
        ("free interval", dirichlet_interval(&Polynomial::zero())),
        ("bump interval", dirichlet_interval(&bump())),
        ("star", kirchhoff_star(&bump())),
    ];
    for (name, qg) in &graphs {
        for lambda_max in [1e3, 1e4] {
            group.bench_with_input(BenchmarkId::new(*name, lambda_max), &lambda_max, |b, &lm| {
                b.iter(|| find_eigenvalues(black_box(qg), lm, &SpectrumOptions::default()).unwrap())
            });
        }
    }
    group.finish();
}

fn trace(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("regularized_trace");
    let qg = lasso(&Polynomial::new(vec![1.0, 2.0, -1.5]));
    let opts = TraceOptions::default();
    for kappa in [4.0, 32.0, 256.0] {
        group.bench_with_input(BenchmarkId::from_parameter(kappa), &kappa, |b, &k| {
            b.iter(|| regularized_trace(black_box(&qg), Regularization::Neumann, c(0.0, k), &opts).unwrap())
        });
    }
    group.finish();
}

fn smatrix(cr: &mut Criterion) {
    let qg = lasso(&bump());
    cr.bench_function("smatrix_series/order 6", |b| b.iter(|| smatrix_series(black_box(&qg), 6)));
}

criterion_group!(benches, spectrum, trace, smatrix);
criterion_main!(benches);
