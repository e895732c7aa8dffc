//! Expand-and-sparsify codes: random expansion, k-winner-take-all and
//! calibrated-threshold sparsification, cell-average function approximation,
//! and the scaling experiments built on top of them.

pub mod approximator;
pub mod cli;
pub mod config;
pub mod encoder;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod oracle;
pub mod persist;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
