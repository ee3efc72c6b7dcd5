use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use confsweep::fixtures;
use confsweep::reduce::{invariant_key, Interner};
use confsweep::{automorphism_count, is_self_dual, reduce_all};
use confsweep_bench::swept;

fn reduce(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduce");
    group.sample_size(10);
    let raw = swept(10, 3);
    group.bench_function("10_3", |b| b.iter_batched(|| raw.clone(), |r| reduce_all(r).unwrap(), BatchSize::LargeInput));
    let raw = swept(17, 4);
    group.bench_function("17_4", |b| b.iter_batched(|| raw.clone(), |r| reduce_all(r).unwrap(), BatchSize::SmallInput));
    group.finish();
}

fn invariants(c: &mut Criterion) {
    let first = fixtures::first_18_4();
    c.bench_function("invariant_key_18_4", |b| b.iter(|| invariant_key(&first, &mut Interner::new())));
    c.bench_function("automorphisms_18_4", |b| b.iter(|| automorphism_count(&first)));
    c.bench_function("self_dual_18_4", |b| b.iter(|| is_self_dual(&first)));
}

criterion_group!(benches, reduce, invariants);
criterion_main!(benches);
