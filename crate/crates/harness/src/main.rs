use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sra_core::exec::Executor;
use sra_core::frame::Frame;
use sra_harness::bench::{bench_frame, synthetic_frame};
use sra_harness::config::Config;
use sra_harness::error::{HarnessError, Result};
use sra_harness::experiments::{run_diffuse, run_three_path, run_two_path_grid};
use sra_harness::{lutbuild, output};

/// Instance count of the full-scale two-path sweep.
const FULL_SCALE_INSTANCES: usize = 261_000;

#[derive(Parser)]
#[command(name = "sra-harness", version, about = "Sparse reflections analysis experiments and benchmarks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply to everything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Overrides the trial (or instance) count of the command.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Median first-path error per estimator and SNR for the three-path scene.
    ThreePath,
    /// SRA mean error heatmap over multipath strength and SNR.
    TwoPathGrid {
        /// Run the full-scale sweep instead of the configured instance count.
        #[arg(long)]
        full: bool,
    },
    /// Median first-path error per estimator and SNR for the diffuse plus specular scene.
    Diffuse,
    /// Table lookup throughput on a synthetic or recorded frame.
    BenchFrame {
        /// Serialized table, as written by build-lut.
        #[arg(long)]
        lut: PathBuf,
        /// Frame file; a synthetic frame of the configured size when omitted.
        #[arg(long)]
        frame: Option<PathBuf>,
        /// Pixels solved directly for the speed comparison.
        #[arg(long, default_value_t = 200)]
        direct_samples: usize,
    },
    /// Builds a lookup table, resuming an interrupted build.
    BuildLut,
}

fn run(cli: Cli) -> Result<()> {
    let c = cli.common;
    let mut cfg = Config::load_or_default(c.config.as_deref())?;
    let exec = Executor::with_workers(c.workers);
    let out = c.out.as_deref();
    match cli.command {
        Command::ThreePath => {
            if let Some(t) = c.trials {
                cfg.three_path.trials = t;
            }
            let table = run_three_path(&cfg, c.seed, &exec)?;
            output::method_table("three-path", &cfg, c.seed, &table).write(out)
        }
        Command::TwoPathGrid { full } => {
            if full {
                cfg.two_path_grid.instances = FULL_SCALE_INSTANCES;
            }
            if let Some(t) = c.trials {
                cfg.two_path_grid.instances = t;
            }
            let table = run_two_path_grid(&cfg, c.seed, &exec)?;
            output::grid_table(&cfg, c.seed, &table).write(out)
        }
        Command::Diffuse => {
            if let Some(t) = c.trials {
                cfg.diffuse.trials = t;
            }
            let table = run_diffuse(&cfg, c.seed, &exec)?;
            output::method_table("diffuse", &cfg, c.seed, &table).write(out)
        }
        Command::BenchFrame { lut, frame, direct_samples } => {
            let table = lutbuild::load(&lut)?;
            let frame = match frame {
                Some(p) => {
                    let file = std::fs::File::open(&p).map_err(|e| HarnessError::Io(p.display().to_string(), e))?;
                    Frame::read_from(std::io::BufReader::new(file))?
                }
                None => synthetic_frame(&table, cfg.bench.width, cfg.bench.height, c.seed)?,
            };
            let repeats = c.trials.unwrap_or(cfg.bench.repeats);
            let report = bench_frame(&table, &frame, &exec, repeats, direct_samples)?;
            let text: String = report.lines().into_iter().map(|l| l + "\n").collect();
            match out {
                Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::Io(p.display().to_string(), e)),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::BuildLut => {
            let path = out.ok_or_else(|| HarnessError::Config("build-lut needs --out".into()))?;
            let (_, report) = lutbuild::build_resumable(&cfg.lut_config()?, path, cfg.lut.chunk_cells, &exec)?;
            println!(
                "{} cells, {} reachable, {} valid; {} chunks built, {} reused",
                report.cells, report.reachable, report.valid, report.chunks_built, report.chunks_reused
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}
