//! The standard-library side of `cannpi-core`: dataset, weight, cue and
//! trajectory files, run configuration, benchmarks, SVG figures and the
//! `cannpi` command-line tool.

pub mod bench;
pub mod cli;
pub mod config;
pub mod dataset;
mod error;
pub mod json;
pub mod pipeline;
pub mod plot;
pub mod tables;
pub mod weights;

pub use error::{Error, Result};
