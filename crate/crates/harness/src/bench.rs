//! Frame throughput of the table path against per-pixel solves.

use std::time::{Duration, Instant};

use rand::Rng;
use sra_core::exec::Executor;
use sra_core::frame::{DepthMap, Frame};
use sra_core::lut::{direct_depth, Lut, StageTimings};
use sra_core::measurement::{build_phi, make_multi_path, synthesize};
use sra_core::pipeline::DepthPipeline;

use crate::error::Result;
use crate::experiments::instance_rng;

/// A frame of two-path pixels: per row, a random direct distance and a
/// weaker or stronger second return 40 to 200 cm behind it, plus 1% noise.
pub fn synthetic_frame(lut: &Lut, width: usize, height: usize, seed: u64) -> Result<Frame> {
    let cfg = lut.config();
    let phi = build_phi(&cfg.grid, &cfg.freq);
    let grid = cfg.grid;
    let m = cfg.freq.m();
    let rows: Vec<Vec<f64>> = (0..height)
        .map(|y| -> Result<Vec<f64>> {
            let mut rng = instance_rng(seed, y as u64);
            let mut row = Vec::with_capacity(width * 2 * m);
            for _ in 0..width {
                let d1 = rng.gen_range(grid.d_min()..grid.d_max() - 40.0).round();
                let d2 = (d1 + rng.gen_range(40.0..200.0)).min(grid.d_max()).round();
                let x = make_multi_path(&[(d1, 1.0), (d2, rng.gen_range(0.1..3.0))], &grid)?;
                let v = synthesize(&x, &phi)?;
                let scale = 0.01 * v.l2_norm();
                row.extend(v.real_view().iter().map(|a| a + scale * rng.gen_range(-1.0..1.0)));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Frame::from_fn(width, height, m, |x, y| rows[y][x * 2 * m..(x + 1) * 2 * m].to_vec())?)
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    pub workers: usize,
    pub repeats: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
    /// Mean per-stage time of the sequential staged path.
    pub stages: StageTimings,
    pub valid_fraction: f64,
    /// Per-pixel direct solve time, estimated on a pixel sample.
    pub direct_us_per_pixel: f64,
    pub speed_ratio: f64,
    /// Staged and executor paths gave bit-identical maps.
    pub consistent: bool,
}

impl BenchReport {
    pub fn lines(&self) -> Vec<String> {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        vec![
            format!("frame {}x{}, {} workers, {} repeats", self.width, self.height, self.workers, self.repeats),
            format!("process_frame: mean {:.2} ms, p95 {:.2} ms", self.mean_ms, self.p95_ms),
            format!(
                "stages: canonicalize {:.2} ms, quantize {:.2} ms, fetch {:.2} ms",
                ms(self.stages.canonicalize),
                ms(self.stages.quantize),
                ms(self.stages.fetch)
            ),
            format!("valid pixels {:.1}%", 100.0 * self.valid_fraction),
            format!("direct solve {:.1} us/pixel, table speedup {:.0}x", self.direct_us_per_pixel, self.speed_ratio),
            format!("staged and parallel maps identical: {}", self.consistent),
        ]
    }
}

/// Times `repeats` table passes over `frame` and a direct solve of
/// `direct_samples` pixels spread over it.
pub fn bench_frame(lut: &Lut, frame: &Frame, exec: &Executor, repeats: usize, direct_samples: usize) -> Result<BenchReport> {
    let repeats = repeats.max(1);
    let mut map: Option<DepthMap> = None;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let t = Instant::now();
        let out = lut.process_frame(frame, exec)?;
        times.push(t.elapsed().as_secs_f64() * 1e3);
        map = Some(out);
    }
    let map = map.expect("at least one repeat");
    let mean_ms = times.iter().sum::<f64>() / times.len() as f64;
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let p95_ms = sorted[((sorted.len() - 1) as f64 * 0.95).ceil() as usize];

    let mut stages = StageTimings::default();
    let mut consistent = true;
    for _ in 0..repeats {
        let (staged, t) = lut.process_frame_staged(frame)?;
        consistent &= staged.bit_identical(&map);
        stages.canonicalize += t.canonicalize;
        stages.quantize += t.quantize;
        stages.fetch += t.fetch;
    }
    let r = repeats as u32;
    let stages = StageTimings { canonicalize: stages.canonicalize / r, quantize: stages.quantize / r, fetch: stages.fetch / r };

    let cfg = lut.config();
    let pipeline = DepthPipeline::new(cfg.dictionary()?, cfg.pipeline.clone())?;
    let n = frame.pixels();
    let samples = direct_samples.clamp(1, n.max(1));
    let t = Instant::now();
    for i in 0..samples {
        let px = i * n / samples;
        std::hint::black_box(direct_depth(&pipeline, &frame.measurement(px), cfg.k, cfg.grid.d_min()));
    }
    let direct_us_per_pixel = t.elapsed().as_secs_f64() * 1e6 / samples as f64;
    let lut_us_per_pixel = mean_ms * 1e3 / n.max(1) as f64;

    Ok(BenchReport {
        width: frame.width(),
        height: frame.height(),
        workers: exec.workers(),
        repeats,
        mean_ms,
        p95_ms,
        stages,
        valid_fraction: map.valid_fraction(),
        direct_us_per_pixel,
        speed_ratio: direct_us_per_pixel / lut_us_per_pixel,
        consistent,
    })
}
