use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pointwarp::losses::{ssim, SsimParams};
use pointwarp::warping::forward_warp;
use pointwarp::{backproject, flow_field};
use pointwarp_bench::cube_fixture;

fn geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("geometry");
    for size in [64, 256] {
        let (r, k, theta) = cube_fixture(size);
        group.bench_with_input(BenchmarkId::new("backproject", size), &size, |b, _| {
            b.iter(|| backproject(black_box(&r.depth), &k, &r.image).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("flow_field", size), &size, |b, _| {
            b.iter(|| flow_field(black_box(&r.depth), &k, &theta).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("forward_warp", size), &size, |b, _| {
            b.iter(|| forward_warp(black_box(&r.image), &r.depth, &k, &theta).unwrap())
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let mut group = c.benchmark_group("ssim");
    for size in [64, 256] {
        let (r, k, theta) = cube_fixture(size);
        let warped = forward_warp(&r.image, &r.depth, &k, &theta).unwrap();
        let (a, b) = (r.image.to_f64(), warped.rgb.to_f64());
        for (name, params) in [
            ("evaluation", SsimParams::evaluation()),
            ("photometric", SsimParams::photometric()),
        ] {
            group.bench_with_input(BenchmarkId::new(name, size), &size, |bench, _| {
                bench.iter(|| ssim(black_box(&a), &b, &params).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, geometry, metrics);
criterion_main!(benches);
