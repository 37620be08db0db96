//! Experiment harness around `commitlab-core`: configuration files, CSV
//! formats, parallel commitment sweeps and the `commitlab` command line.

#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;

pub use config::ExperimentConfig;
pub use error::{AppError, Result};
