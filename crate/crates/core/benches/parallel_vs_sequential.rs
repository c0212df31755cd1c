use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sra_core::exec::Executor;
use sra_core::frame::Frame;
use sra_core::lut::{build_cells, build_lut, LutConfig};
use sra_core::measurement::{build_phi, make_multi_path, synthesize};

fn executors() -> Vec<(&'static str, Executor)> {
    vec![("sequential", Executor::sequential()), ("parallel", Executor::with_workers(4))]
}

fn lut_build(c: &mut Criterion) {
    let cfg = LutConfig { cells_per_dim: 6, ..Default::default() };
    let phi = cfg.dictionary().unwrap();
    let mut group = c.benchmark_group("build_cells");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_function(BenchmarkId::new(name, exec.workers()), |b| {
            b.iter(|| build_cells(&cfg, &phi, 0..256, &exec).unwrap())
        });
    }
    group.finish();
}

fn frame_lookup(c: &mut Criterion) {
    let cfg = LutConfig { cells_per_dim: 6, ..Default::default() };
    let lut = build_lut(&cfg, &cfg.dictionary().unwrap(), &Executor::default()).unwrap();
    let phi = build_phi(&cfg.grid, &cfg.freq);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let frame = Frame::from_fn(128, 96, cfg.freq.m(), |_, _| {
        let d1: f64 = rng.gen_range(50.0..300.0f64).round();
        let x = make_multi_path(&[(d1, 1.0), (d1 + 60.0, rng.gen_range(0.2..2.0))], &cfg.grid).unwrap();
        synthesize(&x, &phi).unwrap().real_view().to_vec()
    })
    .unwrap();
    let mut group = c.benchmark_group("process_frame");
    for (name, exec) in executors() {
        group.bench_function(BenchmarkId::new(name, exec.workers()), |b| {
            b.iter(|| lut.process_frame(&frame, &exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, lut_build, frame_lookup);
criterion_main!(benches);
