//! One worker against the default pool for the data-parallel kernels.
//!
//! Build with `--no-default-features` for the fully sequential variant.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use coherent_core::experiment::{Config, ExperimentKind, Preset};
use coherent_core::grid::Grid;
use coherent_core::oseledets::{top_k_singular, SvdOptions};
use coherent_core::parallel::with_workers;
use coherent_core::systems::{MapFamily, SymbolSequence};
use coherent_core::transfer::{ulam_family, ulam_flow, FamilyMatrices};

const POOLS: [(&str, Option<usize>); 2] = [("one_worker", Some(1)), ("default_pool", None)];

fn bench_map(c: &mut Criterion) {
    let grid = Grid::circle(2000);
    let family = MapFamily::aperiodic4();
    let mut group = c.benchmark_group("ulam_map");
    for (name, workers) in POOLS {
        group.bench_function(BenchmarkId::new(name, "n2000_q100"), |b| {
            b.iter(|| with_workers(workers, || ulam_family(&grid, &family, 1, 100, 0).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn bench_flow(c: &mut Criterion) {
    let grid = Grid::cylinder(24, 12);
    let system = Config::preset(ExperimentKind::Wave2d, Preset::Desk).flow;
    let mut group = c.benchmark_group("ulam_flow");
    group.sample_size(10);
    for (name, workers) in POOLS {
        group.bench_function(BenchmarkId::new(name, "288_boxes_q16_t1"), |b| {
            b.iter(|| with_workers(workers, || ulam_flow(&grid, &system, 0.0, 1.0, 16).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn bench_singular(c: &mut Criterion) {
    let grid = Grid::circle(400);
    let cache = FamilyMatrices::new(&grid, &MapFamily::aperiodic4(), 100).unwrap();
    let symbols = SymbolSequence::driving(-20, 20).unwrap();
    let cocycle = cache.cocycle(&symbols, -10, 20).unwrap();
    let opts = SvdOptions::default();
    let mut group = c.benchmark_group("top_k_singular");
    for (name, workers) in POOLS {
        group.bench_function(BenchmarkId::new(name, "n400_m20_k3"), |b| {
            b.iter(|| with_workers(workers, || top_k_singular(&cocycle, 3, &opts).unwrap()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_map, bench_flow, bench_singular);
criterion_main!(benches);
