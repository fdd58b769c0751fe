//! Batch driver for the patrol simulator: plan files, data ingestion,
//! report writers, SVG plots, checkpoints and the `patrolsim` CLI.
//!
//! The algorithms live in `patrolsim-core`; this crate adds everything
//! that touches the file system or runs in parallel.

pub mod app;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod ingest;
pub mod plots;
pub mod reports;
pub mod runner;

pub use error::{CliError, Result};
