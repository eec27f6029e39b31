//! Compares the rayon dispatch path against the sequential fallback on the
//! ensemble workloads that dominate the check suite and viscosity sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cns_core::grid::GridSpec;
use cns_core::integrate::{IntegratorConfig, RenormalizePolicy};
use cns_core::norms::{inner_h, norm_h};
use cns_core::operators::{bilinear_b, stokes_apply, ViscosityParam};
use cns_core::par::{parallel_map, serial_map};
use cns_core::random::random_smooth_field;

fn orthogonality_residual(seed: u64, grid: GridSpec) -> f64 {
    let u = random_smooth_field(seed, 3.0, grid);
    let b = bilinear_b(&u, &u).expect("same grid");
    let au = stokes_apply(&u);
    inner_h(&b, &au).abs() / (norm_h(&b) * norm_h(&au)).max(f64::MIN_POSITIVE)
}

fn short_run(seed: u64, grid: GridSpec) -> f64 {
    let u0 = random_smooth_field(seed, 4.0, grid);
    let cfg = IntegratorConfig::new(5e-3, 5e-2)
        .expect("valid")
        .with_renormalize(RenormalizePolicy::Off)
        .with_snapshot_stride(100);
    let nu = ViscosityParam::new(0.1).expect("valid");
    let traj = cns_core::integrate::integrate(&u0, &cfg, nu).expect("short run");
    traj.diagnostics.last().unwrap().v_norm
}

fn bench_orthogonality_ensemble(c: &mut Criterion) {
    let grid = GridSpec::new(64).unwrap();
    let seeds: Vec<u64> = (0..16).collect();
    let mut group = c.benchmark_group("orthogonality_ensemble_n64x16");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", 16), &seeds, |b, seeds| {
        b.iter(|| parallel_map(seeds.clone(), |s| orthogonality_residual(s, grid)))
    });
    group.bench_with_input(BenchmarkId::new("serial", 16), &seeds, |b, seeds| {
        b.iter(|| serial_map(seeds.clone(), |s| orthogonality_residual(s, grid)))
    });
    group.finish();
}

fn bench_run_sweep(c: &mut Criterion) {
    let grid = GridSpec::new(32).unwrap();
    let seeds: Vec<u64> = (0..8).collect();
    let mut group = c.benchmark_group("short_runs_n32x8");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", 8), &seeds, |b, seeds| {
        b.iter(|| parallel_map(seeds.clone(), |s| short_run(s, grid)))
    });
    group.bench_with_input(BenchmarkId::new("serial", 8), &seeds, |b, seeds| {
        b.iter(|| serial_map(seeds.clone(), |s| short_run(s, grid)))
    });
    group.finish();
}

criterion_group!(benches, bench_orthogonality_ensemble, bench_run_sweep);
criterion_main!(benches);
