//! Survey-to-explanation pipeline primitives: data screening and encoding,
//! second-order gradient-boosted trees with a logistic objective, exact
//! Shapley attributions and pairwise interaction values over the trained
//! ensemble, evaluation metrics and cross-validation, reference baselines,
//! and the global/local report aggregates built on top of the attributions.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! execution and the command line live in the `boostlens` crate.
#![no_std]

extern crate alloc;

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod evalx;
pub mod exec;
pub mod explain;
pub mod gbt;
pub mod math;
pub mod report;
pub mod seeds;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
