//! Interval scan, single-prime verification and range products.
//!
//! With the default `parallel` feature each workload runs on a one-thread
//! pool and on a pool of every available core. `--no-default-features`
//! reruns the same workloads under the id `sequential`, so saving a baseline
//! from one build and comparing against the other lines them up:
//!
//! ```text
//! cargo bench -p leftfact --no-default-features -- --save-baseline seq
//! cargo bench -p leftfact -- --baseline seq
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leftfact::bigprod::mat_product_range;
use leftfact::{par, scan_interval, verify_residue};

fn pools() -> Vec<(String, usize)> {
    if cfg!(feature = "parallel") {
        let all = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut pools = vec![("rayon-1".to_string(), 1)];
        if all > 1 {
            pools.push((format!("rayon-{all}"), all));
        }
        pools
    } else {
        vec![("sequential".to_string(), 1)]
    }
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for (label, threads) in pools() {
        group.bench_function(BenchmarkId::new(label, "2..2^20"), |b| {
            b.iter(|| {
                par::with_threads(threads, || {
                    scan_interval(2, 1 << 20, None, 1 << 22).unwrap()
                })
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for (label, threads) in pools() {
        group.bench_function(BenchmarkId::new(label, "p=1000000007"), |b| {
            b.iter(|| par::with_threads(threads, || verify_residue(1_000_000_007).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("range_product");
    group.sample_size(10);
    for (label, threads) in pools() {
        group.bench_function(BenchmarkId::new(label, "1..2^17"), |b| {
            b.iter(|| par::with_threads(threads, || mat_product_range(1, 1 << 17)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
