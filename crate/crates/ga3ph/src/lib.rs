//! Command-line front end and file formats for `ga3ph-core`: canonical model
//! text, INI run configuration, trace CSV and SVG plots.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod text;

pub use error::{exit, CliError};
