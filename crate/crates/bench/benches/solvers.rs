use criterion::{criterion_group, criterion_main, Criterion};
use curvebound::effective1d::{fd_doublet, solve_periodic, Discretization, EffectivePotential, PeriodicSpec};
use curvebound::geometry::{profile_from_spec, CurveSpec};
use curvebound::linalg::EigenOptions;
use curvebound::ref1d::{weighted_ground, WeightedSpec};
use curvebound::tubular2d::{assemble, count_below, solve_doublet, solve_lowest, Domain, TubularSpec};
use curvebound::weyl::kappa_integral;
use std::hint::black_box;

fn ellipse() -> curvebound::CurvatureProfile {
    profile_from_spec(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 512, 2048).unwrap()
}

fn one_dimensional(c: &mut Criterion) {
    let p = ellipse();
    let pot = EffectivePotential::from_profile(&p);
    c.bench_function("profile_ellipse", |b| b.iter(ellipse));
    c.bench_function("weighted_ground_n2000", |b| {
        b.iter(|| weighted_ground(black_box(WeightedSpec { t: 20.0, b: 0.01, n_grid: 2000 })).unwrap())
    });
    c.bench_function("periodic_fourier_n2048", |b| {
        let spec = PeriodicSpec { hbar: 0.1, n_s: 2048, discretization: Discretization::Fourier };
        b.iter(|| solve_periodic(&pot, black_box(spec), 2).unwrap())
    });
    c.bench_function("fd_doublet_n2048", |b| b.iter(|| fd_doublet(&pot, black_box(0.1), 2048).unwrap()));
    c.bench_function("kappa_integral", |b| b.iter(|| kappa_integral(&p, black_box(1.0), 512)));
}

fn two_dimensional(c: &mut Criterion) {
    let p = ellipse();
    let mut g = c.benchmark_group("tubular");
    g.sample_size(10);
    let spec = TubularSpec::new(0.2, 256, 1.5 * 5.43);
    g.bench_function("assemble_full_n256", |b| b.iter(|| assemble(&p, black_box(&spec), Domain::Full).unwrap()));
    let op = assemble(&p, &spec, Domain::Full).unwrap();
    g.bench_function("lowest4_full_n256", |b| b.iter(|| solve_lowest(&op, 4, &EigenOptions::default()).unwrap()));
    g.bench_function("count_below_full_n256", |b| b.iter(|| count_below(&op, black_box(-0.9)).unwrap()));
    g.bench_function("doublet_n256", |b| b.iter(|| solve_doublet(&p, black_box(&spec), false).unwrap()));
    g.finish();
}

criterion_group!(benches, one_dimensional, two_dimensional);
criterion_main!(benches);
