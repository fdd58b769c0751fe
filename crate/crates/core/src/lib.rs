//! Core algorithms for simulating GAN-directed police patrol allocation and
//! auditing the resulting detection disparities.
//!
//! Everything here is allocation-only: no file system, no clock, no threads.
//! The companion `patrolsim` crate carries parsing, reports and the CLI.
//!
//! Module map:
//!
//! - [`geodata`]: coordinates, feet distances, polygons and a uniform grid index
//! - [`incident`]: crime incidents, neighborhoods, filtering and month slicing
//! - [`neuralnet`]: dense layers, batch norm, activations, BCE and Adam
//! - [`gan`]: the patrol generator/discriminator pair and its conditional variant
//! - [`simulate`]: race assignment, Noisy-OR detection and monthly runs
//! - [`metrics`]: disparate impact, parity gap, Gini and bias amplification
//! - [`stats`]: OLS, Pearson/Spearman and the Student-t distribution
//! - [`debias`]: the synthetic rebalancing experiment
//! - [`synthetic`]: a seeded synthetic city used by tests and demos

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod debias;
pub mod error;
pub mod gan;
pub mod geodata;
pub mod incident;
pub mod metrics;
pub mod neuralnet;
pub mod seed;
pub mod simulate;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
