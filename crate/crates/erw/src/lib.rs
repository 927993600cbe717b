//! Monte Carlo harness, statistical tests, file formats and the `erw`
//! command-line tool for the elephant random walk on `D∞`.
//!
//! The numerical core lives in [`erw_core`]; this crate adds parallel
//! replications with reproducible random streams, summary statistics,
//! CSV/JSON output and the acceptance suite behind `erw verify`.

pub mod acceptance;
pub mod cli;
mod error;
pub mod experiment;
pub mod format;
pub mod ks;
pub mod rng;
pub mod stats;
pub mod summary;

pub use error::{HarnessError, Result};
pub use erw_core;
