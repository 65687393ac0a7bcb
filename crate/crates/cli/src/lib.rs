//! Configuration, orchestration and output for the `sparse-eit` command.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use manifest::RunManifest;
