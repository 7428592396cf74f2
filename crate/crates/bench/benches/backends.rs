//! Derivative accumulation against the transform-stack oracle.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dendrite::dsl;
use dendrite::presets::{smooth, straight, upright};
use dendrite::{evaluate_tree, evaluate_via_transform_stack};

const SPATIAL: &str = include_str!("../../../programs/spatial.ftree");

fn planar(c: &mut Criterion) {
    let mut group = c.benchmark_group("planar");
    group.sample_size(20);
    for ds in [1e-2, 1e-3] {
        for (name, spec) in [
            ("smooth", smooth(ds, 8).unwrap()),
            ("straight", straight(ds, 8).unwrap()),
        ] {
            let id = format!("{name}/ds={ds}");
            group.bench_with_input(BenchmarkId::new("accumulation", &id), &spec, |b, s| {
                b.iter(|| evaluate_tree(black_box(s), &upright()).unwrap())
            });
            group.bench_with_input(BenchmarkId::new("transform_stack", &id), &spec, |b, s| {
                b.iter(|| evaluate_via_transform_stack(black_box(s), &upright()).unwrap())
            });
        }
    }
    group.finish();
}

fn spatial(c: &mut Criterion) {
    let tree = dsl::compile(&dsl::parse(SPATIAL).unwrap()).unwrap();
    let mut group = c.benchmark_group("spatial");
    group.sample_size(20);
    group.bench_function("accumulation", |b| {
        b.iter(|| evaluate_tree(black_box(&tree.spec), &tree.start).unwrap())
    });
    group.bench_function("transform_stack", |b| {
        b.iter(|| evaluate_via_transform_stack(black_box(&tree.spec), &tree.start).unwrap())
    });
    group.finish();
}

criterion_group!(benches, planar, spatial);
criterion_main!(benches);
