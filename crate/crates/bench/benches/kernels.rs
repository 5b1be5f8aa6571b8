use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use causal_diffusion::evolution::{evolve_spectral, evolve_with, green, EvolveOptions};
use causal_diffusion::{convolve_radial, Dim, GridField, ModelParams, SphereQuadrature};

fn bench_green(c: &mut Criterion) {
    let p = ModelParams::new(1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("green");
    g.sample_size(10);
    for dim in [Dim::Two, Dim::Three] {
        g.bench_with_input(BenchmarkId::new("t=3.5", dim.get()), &dim, |b, &dim| {
            b.iter(|| green(black_box(3.5), &p, dim).unwrap())
        });
    }
    g.finish();
}

fn bench_convolve(c: &mut Criterion) {
    let p = ModelParams::new(1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("convolve_density_pair");
    g.sample_size(10);
    for dim in [Dim::Two, Dim::Three] {
        let a = green(2.0, &p, dim).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(dim.get()), &a, |b, a| {
            b.iter(|| convolve_radial(black_box(a), a).unwrap())
        });
    }
    g.finish();
}

fn bench_evolve(c: &mut Criterion) {
    let p = ModelParams::new(1.0, 0.2).unwrap();
    let u = GridField::centered(Dim::Two, 2.5, 101, |x| (-(x[0] * x[0] + x[1] * x[1]) / 0.05).exp()).unwrap();
    let opts = EvolveOptions::new(SphereQuadrature::new(Dim::Two));
    let mut g = c.benchmark_group("evolve_2d_101");
    g.sample_size(10);
    g.bench_function("stencil", |b| b.iter(|| evolve_with(black_box(&u), 0.5, &p, &opts).unwrap()));
    g.bench_function("spectral", |b| b.iter(|| evolve_spectral(black_box(&u), 0.5, &p).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_green, bench_convolve, bench_evolve);
criterion_main!(benches);
