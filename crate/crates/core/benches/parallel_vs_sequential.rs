//! Sequential against rayon execution for the two hot loops: the grid
//! search over (prefix, config) points and the per-step source search.
//! Without the `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fm2i_core::inpaint::{inpaint, PatchConfig};
use fm2i_core::transforms::{build, extend_for_forecast, TransformKind, DEFAULT_CLAMP_EPS};
use fm2i_core::tuner::{grid_search, ConfigSpace};
use fm2i_core::Execution;
use std::hint::black_box;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn series(n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let t = t as f64;
            50.0 + 10.0 * (t / 1.9).sin() + 0.3 * t
        })
        .collect()
}

fn grid(c: &mut Criterion) {
    let s = series(36);
    let mut group = c.benchmark_group("grid_search");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let mut space = ConfigSpace::default();
        space.pipeline.exec = exec;
        group.bench_with_input(BenchmarkId::new(name, s.len()), &space, |b, space| {
            b.iter(|| grid_search(black_box(&s), space, 6).unwrap())
        });
    }
    group.finish();
}

fn fill(c: &mut Criterion) {
    let mut group = c.benchmark_group("inpaint");
    for n in [48, 96] {
        let x: Vec<f64> = series(n).iter().map(|v| (v - 50.0) / 40.0).collect();
        let (m, _) = build(TransformKind::Mac, &x, DEFAULT_CLAMP_EPS, (0.0, 1.0)).unwrap();
        let (ext, mask) = extend_for_forecast(&m, 8);
        let side = ext.side();
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &exec, |b, &exec| {
                b.iter(|| inpaint(ext.data.as_slice(), &mask, side, side, &PatchConfig::full(5), exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, grid, fill);
criterion_main!(benches);
