//! Continuous-benchmarking analysis: shrink a microbenchmark suite to the
//! benchmarks that exercise code an application benchmark actually runs, and
//! detect application-relevant performance changes across a commit series.
//!
//! The pipeline:
//!
//! 1. [`callgraph`] loads application and microbenchmark call graphs;
//!    [`optimizer`] greedily selects a non-redundant suite and reports
//!    practical relevance and reference impact.
//! 2. [`scheduler`] emits RMIT and duet plans for an external runner.
//! 3. [`measurements`] ingests the resulting data; [`stats`] computes median
//!    changes and bootstrap confidence intervals; [`detection`] flags jumps
//!    and trends with instability-adaptive thresholds.
//! 4. [`simulator`] produces labelled synthetic histories to validate 3.

pub mod callgraph;
pub mod cli;
pub mod config;
pub mod detection;
pub mod error;
pub mod measurements;
pub mod optimizer;
pub mod rng;
pub mod scheduler;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
