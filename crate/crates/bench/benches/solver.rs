use criterion::{criterion_group, criterion_main, Criterion};
use dislocq_bench::{edge_problem, screw_problem};
use dislocq_core::equilibrium::{outer_iteration, solve_screw_3d};
use dislocq_core::linear::assemble_flat_operator;
use dislocq_core::DisplacementField;
use std::hint::black_box;

fn assembly(c: &mut Criterion) {
    let p = edge_problem(0.05, 0.05);
    c.bench_function("flat operator, disk h=0.05", |b| b.iter(|| assemble_flat_operator(black_box(p.mesh()))));
    let psi = DisplacementField::zeros(p.mesh());
    c.bench_function("energy gradient, disk h=0.05", |b| b.iter(|| p.gradient(black_box(&psi)).unwrap()));
}

fn solves(c: &mut Criterion) {
    let p = edge_problem(0.05, 0.1);
    let load = -p.gradient(&DisplacementField::zeros(p.mesh())).unwrap();
    c.bench_function("doped CG solve, disk h=0.1", |b| {
        b.iter(|| p.solver.solve_load(p.mesh(), black_box(&load)).unwrap())
    });
    c.bench_function("outer iteration, disk h=0.1 eps=0.05", |b| b.iter(|| outer_iteration(black_box(&p)).unwrap()));
    let s = screw_problem(0.2, 0.1);
    let mut group = c.benchmark_group("screw");
    group.sample_size(10);
    group.bench_function("outer iteration, ball r=0.2 h=0.1", |b| b.iter(|| solve_screw_3d(black_box(&s)).unwrap()));
    group.finish();
}

criterion_group!(benches, assembly, solves);
criterion_main!(benches);
