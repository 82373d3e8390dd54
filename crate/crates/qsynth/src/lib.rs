//! File formats, benchmarks and the command-line front end for `qsynth-core`.

pub mod bench;
pub mod cli;
pub mod json;

pub use qsynth_core as core;
