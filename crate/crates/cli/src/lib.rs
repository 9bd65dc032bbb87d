//! Library behind the `coxgp` command line tool: configuration, file
//! formats, experiment orchestration, and SVG rendering.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod plots;

pub use error::{CliError, Result};
