use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gdcalc::adler::{extract_table, multiplicativity_check};
use gdcalc::exec::{set_mode, Mode};
use gdcalc::miura::kw_verify;
use gdcalc::random::{operator, rng, PolyShape};
use gdcalc::{Generator, LaxOp, Settings};
use std::hint::black_box;

const MODES: [(&str, Mode); 2] = [
    ("sequential", Mode::Sequential),
    ("parallel", Mode::Parallel),
];

fn compose(c: &mut Criterion) {
    let gens = [Generator::u(1), Generator::u(2)];
    let shape = PolyShape {
        terms: 3,
        degree: 2,
        order: 2,
    };
    let mut r = rng(1);
    let a = operator(&mut r, &gens, 3, -3, shape);
    let b = operator(&mut r, &gens, 3, -3, shape);
    let mut group = c.benchmark_group("compose");
    for (name, mode) in MODES {
        set_mode(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| black_box(a.compose(&b, -8).unwrap()))
        });
    }
    group.finish();
}

fn brackets(c: &mut Criterion) {
    let s = Settings::default();
    let mut group = c.benchmark_group("brackets");
    group.sample_size(10);
    for (name, mode) in MODES {
        set_mode(mode);
        group.bench_function(BenchmarkId::new("table_n4", name), |bench| {
            bench.iter(|| black_box(extract_table(&LaxOp::generic(4), &s).unwrap()))
        });
        group.bench_function(BenchmarkId::new("kw_n3", name), |bench| {
            bench.iter(|| black_box(kw_verify(3, &s).unwrap()))
        });
        group.bench_function(BenchmarkId::new("mult_2_2", name), |bench| {
            bench.iter(|| black_box(multiplicativity_check(2, 2, &s).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, compose, brackets);
criterion_main!(benches);
