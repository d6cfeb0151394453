//! Rayon pool against a single worker on the three hot loops: batch feature
//! extraction, the Monte-Carlo error study and batch SVM scoring.
//!
//! `cargo bench -p mbf-core` compares the default pool with a one-thread
//! pool; `cargo bench -p mbf-core --no-default-features` times the plain
//! sequential build of the same workloads.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mbf_core::benford::{extract_batch, ExtractionConfig};
use mbf_core::par;
use mbf_core::record::{ActivationRecord, AttackId, Group};
use mbf_core::rng::child_rng;
use mbf_core::stats::verify_rayleigh;
use mbf_core::svm::{train_svm, SvmParams};
use rand::Rng;

fn records(count: usize) -> Vec<ActivationRecord> {
    // desk-net layer table
    let table = [288, 256, 32, 10, 10];
    (0..count)
        .map(|i| {
            let mut rng = child_rng(1, i as u64);
            let layers = table.iter().map(|&n| (0..n).map(|_| (rng.random::<f64>() - 0.3).max(0.0)).collect()).collect();
            ActivationRecord::new(i as u64, Group::Clean, AttackId::None, 0, layers).unwrap()
        })
        .collect()
}

fn svm_data(n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = child_rng(2, 0);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let y = x.iter().map(|v| if v[0] + v[1] > 1.0 { 1.0 } else { -1.0 }).collect();
    (x, y)
}

fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    if par::is_parallel() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        vec![("rayon-default", None), ("rayon-1-thread", Some(one))]
    } else {
        vec![("sequential", None)]
    }
}

fn run_in<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn bench(c: &mut Criterion) {
    let recs = records(400);
    let cfg = ExtractionConfig::default();
    let (x, y) = svm_data(600, 80);
    let model = train_svm(&x, &y, &SvmParams::default()).unwrap();

    let mut group = c.benchmark_group("parallel_vs_sequential");
    group.sample_size(10);
    for (name, pool) in modes() {
        group.bench_with_input(BenchmarkId::new("extract_batch_400", name), &(), |b, _| {
            b.iter(|| run_in(&pool, || black_box(extract_batch(&recs, &cfg).unwrap())))
        });
        group.bench_with_input(BenchmarkId::new("rayleigh_200x10k", name), &(), |b, _| {
            b.iter(|| run_in(&pool, || black_box(verify_rayleigh(2.0, 1, 10_000, 200, 3).unwrap())))
        });
        group.bench_with_input(BenchmarkId::new("svm_posteriors_600", name), &(), |b, _| {
            b.iter(|| run_in(&pool, || black_box(model.posteriors(&x).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
