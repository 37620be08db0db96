//! Core of the commitment benchmark: time-series types, rolling-origin forecast
//! generation, forecast accuracy/stability metrics, the battery district
//! environment with KPI scoring, a bounded simplex LP solver, the lookahead
//! (MPC) problem, the FHC/RHC/AFHC control loops and analytic performance bounds.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `commitlab` companion crate.
#![cfg_attr(not(test), no_std)]
#![deny(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod battery;
pub mod bounds;
pub mod error;
pub mod forecast;
pub mod lp;
pub mod metrics;
pub mod mpc;
pub mod policy;
pub mod rng;
pub mod series;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Length of a scoring month in hours.
pub const HOURS_PER_MONTH: usize = 730;
