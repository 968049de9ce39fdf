//! Library half of the benchmark driver: manifests, single runs, sweeps.

pub mod manifest;
pub mod run;

pub use manifest::{OutputPaths, RunManifest};
pub use run::{run_benchmark, run_sweep, BenchmarkReport, SweepAxis, SweepRow};
