//! Sparse reflections analysis for multipath removal in multi-frequency
//! AMCW time-of-flight depth sensing.
//!
//! A pixel measurement is explained as a sparse, nonnegative combination of
//! single-path responses ([`measurement`]), recovered by an L1 program
//! ([`sra`], solved by the simplex code in [`lp`]) and reduced to the distance
//! of the first significant return ([`depth`]). [`canonical`] maps every
//! measurement to a unit-norm, phase-normalized form, which lets [`lut`]
//! answer whole frames with one precomputed table. [`baselines`] holds the
//! two-path maximum likelihood and best single path estimators.

pub mod baselines;
pub mod canonical;
pub mod depth;
pub mod error;
pub mod exec;
pub mod frame;
pub mod lp;
pub mod lut;
pub mod measurement;
pub mod pipeline;
pub mod sra;
