//! Files, pipeline, command line and HTTP service around `gramweave-core`.
//!
//! - [`config`]: the TOML pipeline configuration and its defaults.
//! - [`pipeline`]: corpus to report, writing every intermediate artifact.
//! - [`checkpoint`], [`formats`]: on-disk layouts.
//! - [`model`]: a loaded suggestion model.
//! - [`serve`], [`repl`]: the two ways to query one.
//! - [`fetch`]: cached keyword article download.
//! - [`synth`]: seeded synthetic corpora for tests and demos.
//! - [`report`], [`chart`]: the accuracy table and its SVG rendering.

pub mod chart;
pub mod checkpoint;
pub mod config;
mod error;
pub mod fetch;
pub mod formats;
pub mod model;
pub mod pipeline;
pub mod repl;
pub mod report;
pub mod serve;
pub mod synth;

pub use error::{Error, Result, EXIT_DATA, EXIT_USAGE};
pub use gramweave_core as core;
