//! Std companion to `dsgnn-core`: a rayon executor, text artifact formats,
//! reports, run configuration and the command-line driver.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod format;
pub mod report;

pub use error::{Error, Result};
pub use exec::Rayon;
