use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpisde::stability::StabilityCondition;
use qpisde::{
    convergence_study, integrate, qpi_block_coeffs, qpi_block_solve_oracle, region_scan,
    BrownianPath, ConvergenceConfig, MilsteinSign, SchemeId,
};
use qpisde_bench::{grid_and_path, reference_params};

fn block_coeffs(c: &mut Criterion) {
    let p = reference_params();
    let mut g = c.benchmark_group("qpi_block");
    g.bench_function("closed_form", |b| {
        b.iter(|| {
            qpi_block_coeffs(
                black_box(&p),
                black_box(0.01),
                black_box(0.03),
                black_box(-0.02),
            )
        })
    });
    g.bench_function("linear_solve", |b| {
        b.iter(|| {
            qpi_block_solve_oracle(
                black_box(&p),
                black_box(0.01),
                black_box(0.03),
                black_box(-0.02),
            )
        })
    });
    g.finish();
}

fn integrate_schemes(c: &mut Criterion) {
    let p = reference_params();
    let (grid, path) = grid_and_path(1024, 42);
    let mut g = c.benchmark_group("integrate_1024");
    for scheme in SchemeId::ALL {
        g.bench_with_input(BenchmarkId::from_parameter(scheme), &scheme, |b, &s| {
            b.iter(|| integrate(s, &p, &grid, black_box(&path)).unwrap())
        });
    }
    g.finish();
}

fn path_generation(c: &mut Criterion) {
    c.bench_function("generate_path_4096", |b| {
        b.iter(|| BrownianPath::generate(black_box(7), 1.0, 4096).unwrap())
    });
}

fn stability_scan(c: &mut Criterion) {
    c.bench_function("region_scan_qpi_paper_200x200", |b| {
        b.iter(|| {
            region_scan(
                StabilityCondition::QpiPaper,
                0.5,
                (-4.0, 1.0),
                (0.01, 1.0),
                (200, 200),
            )
            .unwrap()
        })
    });
}

fn small_study(c: &mut Criterion) {
    let cfg = ConvergenceConfig {
        schemes: vec![SchemeId::Qpi, SchemeId::ImplicitEm, SchemeId::Milstein],
        params: reference_params(),
        t_end: 1.0,
        n_list: vec![4, 16, 64, 256],
        n_paths: 50,
        master_seed: 7,
        milstein_sign: MilsteinSign::Standard,
    };
    let mut g = c.benchmark_group("convergence");
    g.sample_size(10);
    g.bench_function("study_50_paths", |b| {
        b.iter(|| convergence_study(&cfg).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    block_coeffs,
    integrate_schemes,
    path_generation,
    stability_scan,
    small_study
);
criterion_main!(benches);
