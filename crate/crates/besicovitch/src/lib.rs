//! Std companion to `besicovitch-core`: run configuration, profile and
//! report file formats, and the command-line front end.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use error::{CliError, Result};
