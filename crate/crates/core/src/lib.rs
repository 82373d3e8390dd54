#![no_std]
//! Circuit synthesis toolkit: exact Grover search, qRAM reductions,
//! constant-depth state preparation and unitary synthesis pipelines, on top
//! of a state-vector simulator with resource accounting.

extern crate alloc;

pub mod error;
pub mod grover;
pub mod linalg;
pub mod qram;
pub mod sim;
pub mod statesynth;
pub mod unitsynth;

pub use error::{Error, Result};
