//! Experiment runner for the `acrcd-core` methods: JSON configurations, seed
//! sweeps on a worker pool, versioned CSV traces, method comparison and
//! rate-exponent fits.

pub mod agd;
pub mod config;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod slope;

pub use config::{parse_seed_range, ExperimentConfig, LogSection, MethodSpec, RunSection, StarSchedule, StartPoint};
pub use error::BenchError;
pub use experiment::{compare, run, run_all, ComparisonRow, Instance, Prepared, RunResult, RunStatus, RunSummary};
pub use slope::{fit_slope, fit_traces, LineFit};
