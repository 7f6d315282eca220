use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nfcs::oracle::{beam_splitter_apply, coherent_port, qfi_jy_variance, tensor};
use nfcs::wigner::{negativity_volume, wigner_value_parity};
use nfcs::{
    exhaustive_search, filtered_coherent_state, greedy_search, score_filter_set, truncation_dim, Complex64, FilterSet,
    SearchSpec, Strategy,
};

fn alpha3i() -> Complex64 {
    Complex64::new(0.0, 3.0)
}

fn scoring(c: &mut Criterion) {
    let beta = Complex64::new(3.0, 0.0);
    let filter = FilterSet::new([7, 9, 11]).unwrap();
    c.bench_function("score_filter_set/alpha=3i/k=3", |b| {
        b.iter(|| score_filter_set(black_box(alpha3i()), beta, black_box(&filter)).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let mut g = c.benchmark_group("search/alpha=3i");
    g.sample_size(10);
    let beta = Complex64::new(3.0, 0.0);
    for k in [2, 3] {
        g.bench_with_input(BenchmarkId::new("exhaustive", k), &k, |b, &k| {
            b.iter(|| exhaustive_search(&SearchSpec::new(alpha3i(), beta, k, Strategy::Exhaustive)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("greedy", k), &k, |b, &k| {
            b.iter(|| greedy_search(&SearchSpec::new(alpha3i(), beta, k, Strategy::Greedy)).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let alpha = Complex64::new(2.0, 0.0);
    let filter = FilterSet::singleton(4);
    let port1 = filtered_coherent_state(alpha, &filter, truncation_dim(alpha, &filter)).unwrap();
    let port2 = coherent_port(Complex64::new(2.0, 0.0), &port1).unwrap();
    let state = tensor(&port1, &port2);
    let mut g = c.benchmark_group("oracle/alpha=2");
    g.sample_size(20);
    g.bench_function("beam_splitter", |b| b.iter(|| beam_splitter_apply(black_box(&state))));
    g.bench_function("jy_variance", |b| b.iter(|| qfi_jy_variance(black_box(&state)).unwrap()));
    g.finish();
}

fn wigner(c: &mut Criterion) {
    let filter = FilterSet::new([7, 9, 11]).unwrap();
    let state = filtered_coherent_state(alpha3i(), &filter, truncation_dim(alpha3i(), &filter)).unwrap();
    c.bench_function("wigner/point", |b| b.iter(|| wigner_value_parity(&state, black_box(Complex64::new(0.3, 1.7)))));
    let mut g = c.benchmark_group("wigner/negativity");
    g.sample_size(10);
    g.bench_function("alpha=3i/step=0.1", |b| b.iter(|| negativity_volume(&state, 8.0, 0.1).unwrap()));
    g.finish();
}

criterion_group!(benches, scoring, search, oracle, wigner);
criterion_main!(benches);
