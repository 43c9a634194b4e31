//! Rayon pool vs a forced single-thread pool on the solver's two outer
//! parallel surfaces: the multistart fan-out inside one minimize call, and a
//! lambda sweep. Without the `parallel` feature both measurements collapse to
//! the sequential path, which is the point of keeping them side by side.

use criterion::{criterion_group, criterion_main, Criterion};
use elastica::geometry::Obstacle;
use elastica::solver::{lambda_sweep, minimize, CurveClass, MultistartConfig, PenaltySchedule, SolverConfig};

fn bench_config() -> SolverConfig {
    SolverConfig {
        segments: 64,
        seed: 0,
        schedule: PenaltySchedule { initial: 1e2, factor: 10.0, rounds: 4, stabilize: 1 },
        multistart: MultistartConfig { count: 6, amplitude: 0.3 },
        max_inner: 400,
        grad_tol: 1e-6,
    }
}

#[cfg(feature = "parallel")]
fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn single_threaded<T>(f: impl FnOnce() -> T) -> T {
    f()
}

fn multistart(c: &mut Criterion) {
    let cone = Obstacle::cone(0.3, 1.2).unwrap();
    let cfg = bench_config();
    let run = || minimize(&cone, 0.9, &cfg, CurveClass::Sym).unwrap().energy.total;
    let mut g = c.benchmark_group("multistart");
    g.sample_size(10);
    g.bench_function("pool", |b| b.iter(run));
    g.bench_function("one-thread", |b| b.iter(|| single_threaded(run)));
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let cone = Obstacle::cone(0.3, 1.2).unwrap();
    let cfg = bench_config();
    let grid = [0.05, 0.4, 0.9, 1.4, 2.0, 2.6];
    let run = || lambda_sweep(&cone, &grid, &cfg, CurveClass::Sym).unwrap().rows.len();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("pool", |b| b.iter(run));
    g.bench_function("one-thread", |b| b.iter(|| single_threaded(run)));
    g.finish();
}

criterion_group!(benches, multistart, sweep);
criterion_main!(benches);
