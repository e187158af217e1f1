use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qmacro_core::branch_size::{c_delta, gaussian_abs_z_oracle, GaussianCat};
use qmacro_core::fisher::{nrf_measure, qfi, AlgebraBasis, MaximizeOptions};
use qmacro_core::fock::FockSpace;
use qmacro_core::linalg::{eigh, HermitianObservable};
use qmacro_core::sampling::{random_density, random_hermitian, rng_for};
use qmacro_core::speed_limits::speed_limit_report;
use qmacro_core::superposition::{named_state, NamedState};
use qmacro_core::tolerance::Tolerances;

fn bench_eigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for d in [16usize, 64, 128] {
        let m = random_hermitian(d, &mut rng_for(1, 0, d as u64));
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| b.iter(|| eigh(black_box(m)).unwrap()));
    }
    group.finish();
}

fn bench_sizes(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("c_delta");
    for n in [2usize, 4, 8] {
        let s = named_state(&NamedState::Ghz { n_modes: n }, 2, &tol).unwrap();
        group.bench_with_input(BenchmarkId::new("ghz", n), &s, |b, s| {
            b.iter(|| c_delta(black_box(s), 0.0, &tol).unwrap())
        });
    }
    let ecs = named_state(&NamedState::Ecs { alpha: 0.5, n_modes: 2 }, 24, &tol).unwrap();
    group.bench_function("ecs_n2_d24", |b| b.iter(|| c_delta(black_box(&ecs), 0.01, &tol)));
    group.finish();

    c.bench_function("gaussian_oracle_psi0", |b| {
        b.iter(|| gaussian_abs_z_oracle(GaussianCat::Psi0, black_box(0.5), 0.2, &tol).unwrap())
    });
}

fn bench_fisher(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("nrf_measure");
    for d in [20usize, 40, 80] {
        let s = named_state(&NamedState::Ecs { alpha: 1.0, n_modes: 4 }, d, &Tolerances { tail: 1e-3, ..tol }).unwrap();
        let basis = AlgebraBasis::h3(&FockSpace::new(d).unwrap());
        group.bench_with_input(BenchmarkId::new("ecs_h3", d), &(s, basis), |b, (s, basis)| {
            b.iter(|| nrf_measure(black_box(s), basis, &MaximizeOptions::default()).unwrap())
        });
    }
    group.finish();

    let mut rng = rng_for(2, 0, 0);
    let rho = random_density(8, 8, &mut rng, &tol).unwrap();
    let h = HermitianObservable::single_mode(random_hermitian(8, &mut rng), &tol).unwrap();
    c.bench_function("qfi_d8", |b| b.iter(|| qfi(black_box(&rho), &h, &tol).unwrap()));
    c.bench_function("speed_limit_report_d8", |b| {
        b.iter(|| speed_limit_report(black_box(&rho), &h, 0.1, &tol).unwrap())
    });
}

criterion_group!(benches, bench_eigh, bench_sizes, bench_fisher);
criterion_main!(benches);
