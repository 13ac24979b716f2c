use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use seamkit::imaging::to_grayscale;
use seamkit::object_aware::optimize_masks;
use seamkit::saliency::{spectral_residual, SaliencyConfig};
use seamkit::seams::{dp_seam_any_orientation, graphcut_seam, voronoi_seam};
use seamkit::OptimConfig;
use seamkit_bench::fixture;

fn classic(c: &mut Criterion) {
    let mut g = c.benchmark_group("classic");
    g.sample_size(10);
    for size in [128, 256, 512] {
        let f = fixture(size);
        g.bench_with_input(BenchmarkId::new("dp", size), &f, |b, f| {
            b.iter(|| dp_seam_any_orientation(&f.cost, &f.pair).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("graphcut", size), &f, |b, f| {
            b.iter(|| graphcut_seam(&f.cost, &f.pair).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("voronoi", size), &f, |b, f| {
            b.iter(|| voronoi_seam(&f.pair, Some(&f.cost)).unwrap())
        });
    }
    g.finish();
}

fn object_aware(c: &mut Criterion) {
    let mut g = c.benchmark_group("object_aware");
    g.sample_size(10);
    let cfg = OptimConfig {
        max_epochs: 100,
        ..OptimConfig::default()
    };
    for size in [128, 256] {
        let f = fixture(size);
        g.bench_with_input(BenchmarkId::new("100_epochs", size), &f, |b, f| {
            b.iter(|| optimize_masks(&f.pair, &f.objects, &f.cost, &cfg).unwrap())
        });
    }
    g.finish();
}

fn saliency(c: &mut Criterion) {
    let f = fixture(512);
    let gray = to_grayscale(&f.target);
    let cfg = SaliencyConfig::default();
    c.bench_function("spectral_residual_512", |b| {
        b.iter(|| spectral_residual(&gray, &cfg).unwrap())
    });
}

criterion_group!(benches, classic, object_aware, saliency);
criterion_main!(benches);
