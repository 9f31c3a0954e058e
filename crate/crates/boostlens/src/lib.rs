//! Files, parallel execution and the command line around `boostlens-core`.

pub mod cli;
pub mod error;
pub mod exec;
pub mod formats;
pub mod manifest;
pub mod table;

pub use error::{Error, Result};
pub use exec::Threads;
