use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaugelab::derived::{bar_eval, luxemburg_eval};
use gaugelab::gauge::{delta_at, SamplePool};
use gaugelab::quasinorm::modulus_of_concavity;
use gaugelab::solver::SolverParams;
use gaugelab::{
    Gauge, MeasureSpace, MusielakOrliczFunction, MusielakOrliczGauge, OrliczFunction, PlusFunction,
    QuasiNormSpace,
};

fn gauge(atoms: usize, function: OrliczFunction) -> MusielakOrliczGauge {
    let space =
        MeasureSpace::new((0..atoms).map(|i| 1.0 + i as f64 / atoms as f64).collect()).unwrap();
    MusielakOrliczGauge::new(space, MusielakOrliczFunction::Shared(function)).unwrap()
}

fn ramp(atoms: usize) -> PlusFunction {
    PlusFunction::from_f64s(&(0..atoms).map(|i| 0.01 + i as f64).collect::<Vec<_>>()).unwrap()
}

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval");
    for atoms in [8, 64, 512] {
        let f = ramp(atoms);
        let square = gauge(atoms, OrliczFunction::power(2.0));
        let rational = gauge(atoms, OrliczFunction::BoundedRational);
        group.bench_with_input(BenchmarkId::new("power-2", atoms), &f, |b, f| {
            b.iter(|| square.eval(black_box(f)))
        });
        group.bench_with_input(BenchmarkId::new("bounded-rational", atoms), &f, |b, f| {
            b.iter(|| rational.eval(black_box(f)))
        });
    }
    group.finish();
}

fn derived(c: &mut Criterion) {
    let solver = SolverParams::default();
    let mut group = c.benchmark_group("derived");
    for atoms in [8, 64] {
        let f = ramp(atoms);
        let g = gauge(atoms, OrliczFunction::power(0.5));
        group.bench_with_input(BenchmarkId::new("luxemburg", atoms), &f, |b, f| {
            b.iter(|| luxemburg_eval(&g, black_box(f), &solver).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bar", atoms), &f, |b, f| {
            b.iter(|| bar_eval(&g, black_box(f), &solver).unwrap())
        });
    }
    group.finish();
}

fn homogeneity(c: &mut Criterion) {
    let g = gauge(4, OrliczFunction::CappedPower { p: 2.0, cap: 1.0 });
    let pool = SamplePool::standard(g.space(), 7);
    c.bench_function("delta_at/capped-power/4", |b| {
        b.iter(|| delta_at(&g, black_box(3.0), &pool).unwrap())
    });
}

fn modulus(c: &mut Criterion) {
    let q = QuasiNormSpace::lp(4, 0.5).unwrap();
    c.bench_function("modulus/l_half/1000", |b| {
        b.iter(|| modulus_of_concavity(&q, 1000, black_box(1)))
    });
}

criterion_group!(benches, evaluation, derived, homogeneity, modulus);
criterion_main!(benches);
