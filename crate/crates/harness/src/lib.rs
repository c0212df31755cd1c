//! Experiment harness: synthetic multipath experiments, table builds and
//! frame benchmarks on top of `sra-core`.

pub mod bench;
pub mod config;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod lutbuild;
pub mod output;
