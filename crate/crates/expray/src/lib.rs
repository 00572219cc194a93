//! File formats, parallel rendering and the command line for `expray-core`.

pub mod cli;
pub mod config;
pub mod formats;
pub mod parallel;
