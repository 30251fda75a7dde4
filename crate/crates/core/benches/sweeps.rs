//! Sequential vs parallel execution on the workloads that dominate runtime.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polar_extrema::extremal::theorem1_from_reps;
use polar_extrema::lemma_lab::{scan_curvature_h_with, scan_g_shape_with, uniform_grid, ScanConfig};
use polar_extrema::polar_sim::{polarize_tree_with, SimConfig};
use polar_extrema::random::random_channels;
use polar_extrema::{make_bsc, z_rep, Exec, Rho, ZRep};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma_scans");
    group.sample_size(10);
    let cfg = ScanConfig {
        t_steps: 256,
        ..ScanConfig::default()
    };
    let g_cfg = ScanConfig {
        z_grid: uniform_grid(0.0, 1.0, 1000),
        ..ScanConfig::default()
    };
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("curvature_h", name), &exec, |b, &e| {
            b.iter(|| scan_curvature_h_with(black_box(&cfg), e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("g_shape", name), &exec, |b, &e| {
            b.iter(|| scan_g_shape_with(black_box(&g_cfg), e).unwrap())
        });
    }
    group.finish();
}

fn trees(c: &mut Criterion) {
    let mut group = c.benchmark_group("polar_tree");
    group.sample_size(10);
    let w = make_bsc(0.11).unwrap();
    let cfg = SimConfig {
        depth: 8,
        rho_list: [0.5, 1.0, 2.0].map(|r| Rho::new(r).unwrap()).to_vec(),
        max_atoms: 128,
        ..SimConfig::default()
    };
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("bsc_depth_8", name), &exec, |b, &e| {
            b.iter(|| polarize_tree_with(black_box(&w), &cfg, e).unwrap())
        });
    }
    group.finish();
}

fn channel_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("extremality_sweep");
    group.sample_size(10);
    let reps: Vec<(ZRep, ZRep)> = random_channels(7, 400, 2, 6)
        .chunks(2)
        .map(|p| (z_rep(&p[0]), z_rep(&p[1])))
        .collect();
    let rhos: Vec<Rho> = [0.25, 0.5, 1.0, 1.5, 2.0, 4.0].map(|r| Rho::new(r).unwrap()).to_vec();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("200_pairs", name), &exec, |b, &e| {
            b.iter(|| {
                e.map(&reps, |(r1, r2)| {
                    rhos.iter()
                        .all(|&r| theorem1_from_reps(r, r1, r2).unwrap().holds())
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, scans, trees, channel_sweep);
criterion_main!(benches);
