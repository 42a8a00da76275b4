use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use eqlab_core::dynamics::{backward_orbit_sample, RationalSelfMap};
use eqlab_core::henon::{line_intersection_cloud, LinePair, RegularAutomorphism};
use eqlab_core::poly::{bivariate_common_zeros, univariate_roots, FloatPoly};
use eqlab_core::potential::{estimate_sup, QpshWitness, Region};
use eqlab_core::projective::sphere_log_modulus_integral;
use eqlab_core::{ProjectivePoint, SeedStream};

fn roots(c: &mut Criterion) {
    let mut rng = SeedStream::new(1).rng(0);
    for n in [50u32, 200] {
        let f = FloatPoly::random_kostlan(2, n, false, &mut rng);
        c.bench_function(&format!("univariate_roots/n{n}"), |b| b.iter(|| univariate_roots(black_box(&f)).unwrap()));
    }
}

fn common_zeros(c: &mut Criterion) {
    let mut rng = SeedStream::new(2).rng(0);
    let p = FloatPoly::random_kostlan(3, 5, false, &mut rng);
    let q = FloatPoly::random_kostlan(3, 5, false, &mut rng);
    c.bench_function("bivariate_common_zeros/n5", |b| b.iter(|| bivariate_common_zeros(black_box(&p), black_box(&q)).unwrap()));
}

fn backward(c: &mut Criterion) {
    let f = RationalSelfMap::quadratic(Complex64::new(-1.0, 0.0)).unwrap();
    let x0 = ProjectivePoint::from_affine(Complex64::new(0.37, 0.61));
    c.bench_function("backward_orbit/depth25_atoms1e4", |b| {
        b.iter(|| backward_orbit_sample(&[&f], &x0, 25, 10_000, SeedStream::new(3)).unwrap())
    });
}

fn henon(c: &mut Criterion) {
    let f = RegularAutomorphism::standard();
    let pair = LinePair::random(&mut SeedStream::new(4).rng(0));
    let mut g = c.benchmark_group("henon");
    g.sample_size(10);
    g.bench_function("intersection/n2_m2", |b| b.iter(|| line_intersection_cloud(&f, 2, 2, black_box(&pair)).unwrap()));
    g.bench_function("intersection/n3_m3", |b| b.iter(|| line_intersection_cloud(&f, 3, 3, black_box(&pair)).unwrap()));
    g.finish();
}

fn potential(c: &mut Criterion) {
    let w = QpshWitness::new(FloatPoly::random_kostlan(3, 3, false, &mut SeedStream::new(5).rng(0))).unwrap();
    c.bench_function("estimate_sup/k2_n3", |b| b.iter(|| estimate_sup(|p| w.raw(p), 2, &Region::Whole, 5000, SeedStream::new(6))));
    c.bench_function("sphere_log_integral/k3_1e5", |b| b.iter(|| sphere_log_modulus_integral(3, 100_000, SeedStream::new(7))));
}

criterion_group!(kernels, roots, common_zeros, backward, henon, potential);
criterion_main!(kernels);
