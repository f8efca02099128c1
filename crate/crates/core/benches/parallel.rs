//! Sequential against parallel execution on the batch workloads.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mmsot_core::exec::Execution;
use mmsot_core::scenarios::{build_polyline, random, DEFAULT_POLYLINE};
use mmsot_core::space::{from_metric_graph_with, MetricGraph};
use mmsot_core::tangents::tangent_line_test;
use mmsot_core::transport::solve_batch;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn batch_solves(c: &mut Criterion) {
    let mut rng = random::rng(1);
    let space = random::planar_space(&mut rng, 40).unwrap();
    let pairs: Vec<_> = (0..64)
        .map(|_| (random::measure(&mut rng, &space, 8, 9).unwrap(), random::measure(&mut rng, &space, 8, 9).unwrap()))
        .collect();
    let mut group = c.benchmark_group("solve_batch_64x8x8");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| solve_batch(black_box(&space), black_box(&pairs), exec))
        });
    }
    group.finish();
}

fn shortest_paths(c: &mut Criterion) {
    let vertices: Vec<String> = ["o", "A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let graph = MetricGraph::new(vertices, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], 1.0 / 128.0).unwrap();
    let mut group = c.benchmark_group("metric_graph_tripod_h128");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| from_metric_graph_with(black_box(&graph), exec).unwrap())
        });
    }
    group.finish();
}

fn scale_sweep(c: &mut Criterion) {
    let space = build_polyline(&DEFAULT_POLYLINE, 1.0 / 128.0).unwrap();
    let x = space.index_of("p1").unwrap();
    let schedule = [1.0, 2.0, 4.0, 8.0, 16.0];
    let mut group = c.benchmark_group("tangent_line_polyline");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| tangent_line_test(black_box(&space), x, &schedule, 1.0, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, batch_solves, shortest_paths, scale_sweep);
criterion_main!(benches);
