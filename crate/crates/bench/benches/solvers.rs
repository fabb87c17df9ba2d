use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use scx_bench::{lower_bound, plane, random_discrete};
use scx_core::{learn_full, learn_partial, solve_2d_general, solve_2d_linear, solve_no_fp};

fn discrete(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_no_fp");
    for (n, m) in [(100, 20), (1000, 50), (5000, 200)] {
        let inst = random_discrete(n, m, 7);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}x{m}")),
            &inst,
            |b, inst| b.iter(|| solve_no_fp(black_box(inst))),
        );
    }
    group.finish();
}

fn learners(c: &mut Criterion) {
    let fam = lower_bound(64);
    c.bench_function("learn_full/m64", |b| {
        b.iter(|| learn_full(black_box(&fam.dist), 0.1, 0.1, 3))
    });
    c.bench_function("learn_partial/m64", |b| {
        b.iter(|| learn_partial(black_box(&fam.dist), 0.1, 0.1, 3))
    });
}

fn planar(c: &mut Criterion) {
    let mut group = c.benchmark_group("planar");
    for n in [10, 100, 400] {
        let inst = plane(n);
        group.bench_with_input(BenchmarkId::new("linear", n), &inst, |b, inst| {
            b.iter(|| solve_2d_linear(black_box(inst)))
        });
        group.bench_with_input(BenchmarkId::new("general", n), &inst, |b, inst| {
            b.iter(|| solve_2d_general(black_box(inst)))
        });
    }
    group.finish();
}

criterion_group!(benches, discrete, learners, planar);
criterion_main!(benches);
